#include "exmap/gca.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "exmap/errors.hpp"

namespace exmap {

RealMatrix build_features(const std::vector<int>& d, const std::vector<int>& x) {
  if (d.size() != x.size())
    throw std::invalid_argument("build_features: sequence lengths disagree");
  RealMatrix m(static_cast<int>(d.size()), 2);
  for (int i = 0; i < m.rows; ++i) {
    m(i, 0) = static_cast<double>(d[i]);
    m(i, 1) = static_cast<double>(x[i]);
  }
  return m;
}

GcaOutput gca_forward(const GcaModel& model, const SparseMatrix& norm_adj,
                      const RealMatrix& features) {
  RealMatrix h = features;
  const int layers = static_cast<int>(model.encoder_weights.size());
  for (int k = 0; k < layers; ++k) {
    h = matmul(norm_adj.multiply(h), model.encoder_weights[k]);
    if (k + 1 < layers && model.hidden_activation == Activation::ReLU)
      for (double& v : h.data)
        if (v < 0.0) v = 0.0;
  }
  GcaOutput out;
  out.embedding.resize(h.rows);
  out.prediction.resize(h.rows);
  for (int i = 0; i < h.rows; ++i) {
    out.embedding[i] = h(i, 0);
    out.prediction[i] = model.decoder_weight * h(i, 0) + model.decoder_bias;
  }
  return out;
}

GcaOutput gca_forward(const GcaModel& model, const Graph& g, const RealMatrix& features) {
  return gca_forward(model, normalized_adjacency(g).normalized, features);
}

GcaTraining train_gca(const Graph& g, const std::vector<int>& d, const std::vector<int>& x,
                      const std::vector<double>& y, const GcaConfig& cfg,
                      const std::vector<int>* loss_mask) {
  if (g.n < 2) throw std::invalid_argument("train_gca: need at least two observations");
  if (cfg.epochs < 1 || cfg.learning_rate <= 0.0)
    throw std::invalid_argument("train_gca: bad optimizer settings");
  if (loss_mask && static_cast<int>(loss_mask->size()) != g.n)
    throw std::invalid_argument("train_gca: loss mask length mismatch");

  const RealMatrix features = build_features(d, x);
  const SparseMatrix norm_adj = normalized_adjacency(g).normalized;

  std::vector<int> dims;
  dims.push_back(2);
  for (int w : cfg.hidden_dims) {
    if (w < 1) throw std::invalid_argument("train_gca: hidden width must be >= 1");
    dims.push_back(w);
  }
  dims.push_back(1);

  Rng rng(cfg.seed);
  ParameterSet params;
  std::vector<int> enc_idx;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k)
    enc_idx.push_back(params.add("encoder_" + std::to_string(k),
                                 glorot_init(dims[k], dims[k + 1], rng)));
  const int dec_w_idx = params.add("decoder_weight", glorot_init(1, 1, rng));
  double ymean = 0.0;
  double ycount = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (loss_mask && (*loss_mask)[i] == 0) continue;
    ymean += y[i];
    ycount += 1.0;
  }
  if (ycount < 2.0) throw std::invalid_argument("train_gca: fewer than two unmasked outcomes");
  ymean /= ycount;
  RealMatrix bias0(1, 1);
  bias0.data[0] = ymean;
  const int dec_b_idx = params.add("decoder_bias", bias0);

  GcaTraining result;
  result.epoch_loss.reserve(cfg.epochs);
  const RealMatrix target = RealMatrix::column(y);
  RealMatrix mask_col;
  if (loss_mask) {
    mask_col = RealMatrix(g.n, 1);
    for (int i = 0; i < g.n; ++i) mask_col(i, 0) = (*loss_mask)[i] != 0 ? 1.0 : 0.0;
  }

  Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    tape.clear();
    int h = tape.constant(features);
    for (std::size_t k = 0; k < enc_idx.size(); ++k) {
      h = tape.matmul(tape.spmm(&norm_adj, h), tape.parameter(params, enc_idx[k]));
      if (k + 1 < enc_idx.size() && cfg.hidden_activation == Activation::ReLU)
        h = tape.relu(h);
    }
    const int pred = tape.add_bias(tape.matmul(h, tape.parameter(params, dec_w_idx)),
                                   tape.parameter(params, dec_b_idx));
    const int loss = loss_mask
                         ? tape.mse_masked(pred, tape.constant(target), tape.constant(mask_col))
                         : tape.mse(pred, tape.constant(target));

    const double loss_value = tape.scalar_value(loss);
    if (!std::isfinite(loss_value))
      throw training_divergence_error("train_gca: non-finite loss at epoch " +
                                      std::to_string(epoch));
    result.epoch_loss.push_back(loss_value);

    tape.backward(loss);
    if (cfg.optimizer == OptimizerKind::Adam)
      adam_step(params, cfg.learning_rate);
    else
      sgd_step(params, cfg.learning_rate);
  }

  for (int idx : enc_idx) result.model.encoder_weights.push_back(params.at(idx).value);
  result.model.decoder_weight = params.at(dec_w_idx).value.data[0];
  result.model.decoder_bias = params.at(dec_b_idx).value.data[0];
  result.model.hidden_activation = cfg.hidden_activation;
  return result;
}

ExposureVector learned_exposure(const GcaModel& model, const Graph& g,
                                const std::vector<int>& d, const std::vector<int>& x) {
  ExposureVector out;
  out.kind = ExposureKind::Learned;
  out.values = gca_forward(model, g, build_features(d, x)).embedding;
  return out;
}

namespace {

constexpr char kMagic[4] = {'E', 'X', 'G', 'C'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_matrix(std::ostream& out, const std::string& name, const RealMatrix& m) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<std::uint32_t>(m.rows));
  write_u32(out, static_cast<std::uint32_t>(m.cols));
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

std::pair<std::string, RealMatrix> read_matrix(std::istream& in) {
  const std::uint32_t name_len = read_u32(in);
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  const int rows = static_cast<int>(read_u32(in));
  const int cols = static_cast<int>(read_u32(in));
  RealMatrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) throw std::invalid_argument("load_gca: truncated container");
  return {std::move(name), std::move(m)};
}

}  // namespace

void save_gca(const GcaModel& model, std::ostream& out) {
  out.write(kMagic, 4);
  write_u32(out, 1);  // version
  write_u32(out, model.hidden_activation == Activation::ReLU ? 1 : 0);
  write_u32(out, static_cast<std::uint32_t>(model.encoder_weights.size()) + 2);
  for (std::size_t k = 0; k < model.encoder_weights.size(); ++k)
    write_matrix(out, "encoder_" + std::to_string(k), model.encoder_weights[k]);
  RealMatrix w(1, 1), b(1, 1);
  w.data[0] = model.decoder_weight;
  b.data[0] = model.decoder_bias;
  write_matrix(out, "decoder_weight", w);
  write_matrix(out, "decoder_bias", b);
}

GcaModel load_gca(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::invalid_argument("load_gca: bad magic");
  if (read_u32(in) != 1) throw std::invalid_argument("load_gca: unsupported version");

  GcaModel model;
  model.hidden_activation = read_u32(in) == 1 ? Activation::ReLU : Activation::Identity;
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t k = 0; k < count; ++k) {
    auto [name, m] = read_matrix(in);
    if (name == "decoder_weight")
      model.decoder_weight = m.data.at(0);
    else if (name == "decoder_bias")
      model.decoder_bias = m.data.at(0);
    else if (name.rfind("encoder_", 0) == 0)
      model.encoder_weights.push_back(std::move(m));
    else
      throw std::invalid_argument("load_gca: unknown entry " + name);
  }
  return model;
}

}  // namespace exmap
