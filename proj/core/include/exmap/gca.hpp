#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "exmap/exposure.hpp"
#include "exmap/graph.hpp"
#include "exmap/tape.hpp"

namespace exmap {

enum class Activation { ReLU, Identity };
enum class OptimizerKind { Adam, Sgd };

struct GcaConfig {
  // Widths of the hidden encoder layers; the final encoder layer always has
  // width 1 and identity activation so the embedding is unconstrained.
  std::vector<int> hidden_dims{16};
  double learning_rate = 0.01;
  int epochs = 200;
  Activation hidden_activation = Activation::ReLU;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
};

// Encoder weights per layer plus the scalar regression decoder.
struct GcaModel {
  std::vector<RealMatrix> encoder_weights;
  double decoder_weight = 0.0;
  double decoder_bias = 0.0;
  Activation hidden_activation = Activation::ReLU;
};

// Row i = (d_i, x_i).
RealMatrix build_features(const std::vector<int>& d, const std::vector<int>& x);

struct GcaOutput {
  std::vector<double> embedding;
  std::vector<double> prediction;
};

// One pass through the encoder and decoder. Each layer aggregates over the
// normalized adjacency, multiplies by the layer weight, then applies the
// activation (identity on the final layer).
GcaOutput gca_forward(const GcaModel& model, const SparseMatrix& norm_adj,
                      const RealMatrix& features);
GcaOutput gca_forward(const GcaModel& model, const Graph& g, const RealMatrix& features);

struct GcaTraining {
  GcaModel model;
  std::vector<double> epoch_loss;
};

// Full-batch training against the mean squared error of the decoder
// prediction. Glorot-initialized from cfg.seed; the decoder bias starts at
// the sample mean of y. Throws training_divergence_error on non-finite loss.
// An optional loss mask restricts the fitted outcomes to the nodes where
// mask != 0 while message passing still spans the whole graph; embeddings
// of masked-out nodes then never saw their own outcomes.
GcaTraining train_gca(const Graph& g, const std::vector<int>& d, const std::vector<int>& x,
                      const std::vector<double>& y, const GcaConfig& cfg,
                      const std::vector<int>* loss_mask = nullptr);

// Embedding of a trained model as an exposure vector tagged `Learned`.
ExposureVector learned_exposure(const GcaModel& model, const Graph& g,
                                const std::vector<int>& d, const std::vector<int>& x);

// Binary container of named weight matrices; round-trips are bit-exact.
void save_gca(const GcaModel& model, std::ostream& out);
GcaModel load_gca(std::istream& in);

}  // namespace exmap
