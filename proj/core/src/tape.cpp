#include "exmap/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace exmap {

int ParameterSet::add(const std::string& name, RealMatrix init) {
  Entry e;
  e.name = name;
  e.grad = RealMatrix(init.rows, init.cols);
  e.moment1 = RealMatrix(init.rows, init.cols);
  e.moment2 = RealMatrix(init.rows, init.cols);
  e.value = std::move(init);
  entries.push_back(std::move(e));
  return static_cast<int>(entries.size()) - 1;
}

ParameterSet::Entry* ParameterSet::find(const std::string& name) {
  for (auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void ParameterSet::zero_grads() {
  for (auto& e : entries)
    for (double& g : e.grad.data) g = 0.0;
}

void adam_step(ParameterSet& params, double lr, double beta1, double beta2, double eps) {
  params.step_count += 1;
  const double t = static_cast<double>(params.step_count);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (auto& e : params.entries) {
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      const double g = e.grad.data[i];
      e.moment1.data[i] = beta1 * e.moment1.data[i] + (1.0 - beta1) * g;
      e.moment2.data[i] = beta2 * e.moment2.data[i] + (1.0 - beta2) * g * g;
      const double mhat = e.moment1.data[i] / bc1;
      const double vhat = e.moment2.data[i] / bc2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
  params.zero_grads();
}

void sgd_step(ParameterSet& params, double lr) {
  params.step_count += 1;
  for (auto& e : params.entries)
    for (std::size_t i = 0; i < e.value.data.size(); ++i)
      e.value.data[i] -= lr * e.grad.data[i];
  params.zero_grads();
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::constant(RealMatrix value) {
  Node n;
  n.op = Op::Constant;
  n.val = std::move(value);
  return push(std::move(n));
}

int Tape::parameter(ParameterSet& params, int param_idx) {
  Node n;
  n.op = Op::Parameter;
  n.params = &params;
  n.param_idx = param_idx;
  n.val = params.at(param_idx).value;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  Node n;
  n.op = Op::Matmul;
  n.a = a;
  n.b = b;
  n.val = exmap::matmul(nodes_[a].val, nodes_[b].val);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  if (!nodes_[a].val.same_shape(nodes_[b].val))
    throw std::invalid_argument("Tape::add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] += nodes_[b].val.data[i];
  return push(std::move(n));
}

int Tape::add_bias(int a, int bias) {
  if (nodes_[bias].val.size() != 1)
    throw std::invalid_argument("Tape::add_bias: bias node must be 1x1");
  Node n;
  n.op = Op::AddBias;
  n.a = a;
  n.b = bias;
  n.val = nodes_[a].val;
  const double b = nodes_[bias].val.data[0];
  for (double& v : n.val.data) v += b;
  return push(std::move(n));
}

int Tape::spmm(const SparseMatrix* op, int h) {
  Node n;
  n.op = Op::Spmm;
  n.a = h;
  n.sparse = op;
  n.val = op->multiply(nodes_[h].val);
  return push(std::move(n));
}

int Tape::relu(int a) {
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.val = nodes_[a].val;
  for (double& v : n.val.data)
    if (v < 0.0) v = 0.0;
  return push(std::move(n));
}

int Tape::mse(int pred, int target) {
  if (!nodes_[pred].val.same_shape(nodes_[target].val))
    throw std::invalid_argument("Tape::mse: shape mismatch");
  Node n;
  n.op = Op::Mse;
  n.a = pred;
  n.b = target;
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_[pred].val.data.size(); ++i) {
    const double d = nodes_[pred].val.data[i] - nodes_[target].val.data[i];
    s += d * d;
  }
  n.val = RealMatrix(1, 1);
  n.val.data[0] = s / static_cast<double>(nodes_[pred].val.size());
  return push(std::move(n));
}

int Tape::mse_masked(int pred, int target, int mask) {
  if (!nodes_[pred].val.same_shape(nodes_[target].val) ||
      !nodes_[pred].val.same_shape(nodes_[mask].val))
    throw std::invalid_argument("Tape::mse_masked: shape mismatch");
  Node n;
  n.op = Op::MseMasked;
  n.a = pred;
  n.b = target;
  n.c = mask;
  double s = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < nodes_[pred].val.data.size(); ++i) {
    const double m = nodes_[mask].val.data[i];
    if (m == 0.0) continue;
    const double d = nodes_[pred].val.data[i] - nodes_[target].val.data[i];
    s += m * d * d;
    count += m;
  }
  if (count <= 0.0) throw std::invalid_argument("Tape::mse_masked: empty mask");
  n.val = RealMatrix(1, 1);
  n.val.data[0] = s / count;
  return push(std::move(n));
}

int Tape::sum(int a) {
  Node n;
  n.op = Op::Sum;
  n.a = a;
  double s = 0.0;
  for (double v : nodes_[a].val.data) s += v;
  n.val = RealMatrix(1, 1);
  n.val.data[0] = s;
  return push(std::move(n));
}

double Tape::scalar_value(int node) const {
  if (nodes_[node].val.size() != 1)
    throw std::invalid_argument("Tape::scalar_value: node is not scalar");
  return nodes_[node].val.data[0];
}

void Tape::backward(int loss) {
  if (nodes_[loss].val.size() != 1)
    throw std::invalid_argument("Tape::backward: loss must be scalar");

  std::vector<RealMatrix> adj(nodes_.size());
  auto ensure = [&](int idx) {
    if (adj[idx].size() == 0)
      adj[idx] = RealMatrix(nodes_[idx].val.rows, nodes_[idx].val.cols);
  };
  ensure(loss);
  adj[loss].data[0] = 1.0;

  for (int i = loss; i >= 0; --i) {
    if (adj[i].size() == 0) continue;  // node not on a path to the loss
    const Node& n = nodes_[i];
    const RealMatrix& g = adj[i];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Parameter: {
        RealMatrix& dst = n.params->at(n.param_idx).grad;
        for (std::size_t k = 0; k < dst.data.size(); ++k) dst.data[k] += g.data[k];
        break;
      }
      case Op::Matmul: {
        ensure(n.a);
        ensure(n.b);
        const RealMatrix da = matmul_nt(g, nodes_[n.b].val);  // g * B^T
        const RealMatrix db = matmul_tn(nodes_[n.a].val, g);  // A^T * g
        for (std::size_t k = 0; k < da.data.size(); ++k) adj[n.a].data[k] += da.data[k];
        for (std::size_t k = 0; k < db.data.size(); ++k) adj[n.b].data[k] += db.data[k];
        break;
      }
      case Op::Add: {
        ensure(n.a);
        ensure(n.b);
        for (std::size_t k = 0; k < g.data.size(); ++k) {
          adj[n.a].data[k] += g.data[k];
          adj[n.b].data[k] += g.data[k];
        }
        break;
      }
      case Op::AddBias: {
        ensure(n.a);
        ensure(n.b);
        double s = 0.0;
        for (std::size_t k = 0; k < g.data.size(); ++k) {
          adj[n.a].data[k] += g.data[k];
          s += g.data[k];
        }
        adj[n.b].data[0] += s;
        break;
      }
      case Op::Spmm: {
        ensure(n.a);
        const RealMatrix dh = n.sparse->multiply_transpose(g);
        for (std::size_t k = 0; k < dh.data.size(); ++k) adj[n.a].data[k] += dh.data[k];
        break;
      }
      case Op::Relu: {
        ensure(n.a);
        const RealMatrix& x = nodes_[n.a].val;
        for (std::size_t k = 0; k < g.data.size(); ++k)
          if (x.data[k] > 0.0) adj[n.a].data[k] += g.data[k];
        break;
      }
      case Op::Mse: {
        ensure(n.a);
        const double scale = 2.0 * g.data[0] / static_cast<double>(nodes_[n.a].val.size());
        for (std::size_t k = 0; k < nodes_[n.a].val.data.size(); ++k)
          adj[n.a].data[k] += scale * (nodes_[n.a].val.data[k] - nodes_[n.b].val.data[k]);
        break;
      }
      case Op::MseMasked: {
        ensure(n.a);
        double count = 0.0;
        for (double m : nodes_[n.c].val.data) count += m;
        const double scale = 2.0 * g.data[0] / count;
        for (std::size_t k = 0; k < nodes_[n.a].val.data.size(); ++k) {
          const double m = nodes_[n.c].val.data[k];
          if (m == 0.0) continue;
          adj[n.a].data[k] += scale * m * (nodes_[n.a].val.data[k] - nodes_[n.b].val.data[k]);
        }
        break;
      }
      case Op::Sum: {
        ensure(n.a);
        for (std::size_t k = 0; k < adj[n.a].data.size(); ++k) adj[n.a].data[k] += g.data[0];
        break;
      }
    }
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace exmap
