#pragma once

#include <string>
#include <vector>

#include "exmap/matrix.hpp"

namespace exmap {

// Named trainable matrices with gradient accumulators and Adam moment
// buffers. Entries keep insertion order so updates are deterministic.
struct ParameterSet {
  struct Entry {
    std::string name;
    RealMatrix value;
    RealMatrix grad;
    RealMatrix moment1;
    RealMatrix moment2;
  };

  std::vector<Entry> entries;
  long step_count = 0;

  int add(const std::string& name, RealMatrix init);
  Entry& at(int idx) { return entries[idx]; }
  const Entry& at(int idx) const { return entries[idx]; }
  Entry* find(const std::string& name);
  void zero_grads();
};

// Full-batch Adam with decay (0.9, 0.999) and epsilon 1e-8. Gradients are
// consumed (cleared) by the step.
void adam_step(ParameterSet& params, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Plain gradient descent, same gradient-clearing contract.
void sgd_step(ParameterSet& params, double lr);

// Reverse-mode differentiation over a dynamically recorded expression.
// Operation set: matmul, sparse aggregation with a constant operator,
// elementwise add, scalar-bias broadcast, ReLU, mean-squared-error and sum
// reductions. The recorded graph is rebuilt per training step.
class Tape {
 public:
  int constant(RealMatrix value);
  // Leaf bound to params.entries[param_idx]; backward() accumulates there.
  int parameter(ParameterSet& params, int param_idx);

  int matmul(int a, int b);
  int add(int a, int b);
  // a (r x c) plus a 1x1 node broadcast over every entry.
  int add_bias(int a, int bias);
  // op * H with `op` held constant; `op` must outlive the tape.
  int spmm(const SparseMatrix* op, int h);
  int relu(int a);
  // Scalar mean of squared elementwise differences.
  int mse(int pred, int target);
  // Mean of squared differences over the rows where mask is nonzero; the
  // mask is a constant 0/1 node of the same shape.
  int mse_masked(int pred, int target, int mask);
  int sum(int a);

  const RealMatrix& value(int node) const { return nodes_[node].val; }
  double scalar_value(int node) const;

  // Accumulates d(loss)/d(parameter) into every parameter leaf reached from
  // `loss`, which must be scalar.
  void backward(int loss);

  void clear();

 private:
  enum class Op { Constant, Parameter, Matmul, Add, AddBias, Spmm, Relu, Mse, MseMasked, Sum };
  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    int c = -1;
    const SparseMatrix* sparse = nullptr;
    ParameterSet* params = nullptr;
    int param_idx = -1;
    RealMatrix val;
  };
  int push(Node n);
  std::vector<Node> nodes_;
};

}  // namespace exmap
