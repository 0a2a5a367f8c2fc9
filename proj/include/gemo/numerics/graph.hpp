// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gemo/numerics/matrix.hpp"

namespace gemo {

using NodeId = std::size_t;

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,        // a * b
  kMatMulNT,      // a * b^T
  kTranspose,
  kAddRow,        // x + broadcast 1xC bias
  kAdd,
  kScale,
  kRelu,
  kMeanRows,
  kStackRows,
  kRowLogSoftmax,
  kKLDivergence,  // (1/N) sum P (log P - Qlog), P held as a constant target
  kSum,
};

/// Define-by-run computation record. Nodes are appended in evaluation order,
/// so parents always precede children and backward is a single reverse sweep.
/// A graph belongs to one thread for its whole forward/backward pass.
class Graph {
 public:
  NodeId constant(Matrix value);

  /// Registers parameter `slot`. Repeated calls with the same slot return the
  /// original node so that every use accumulates into one gradient.
  NodeId parameter(std::size_t slot, const Matrix& value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add_row(NodeId x, NodeId bias);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId x, double factor);
  NodeId relu(NodeId x);
  NodeId mean_rows(NodeId seq);
  NodeId stack_rows(std::span<const NodeId> parts);
  NodeId row_log_softmax(NodeId x);
  /// KL(P || softmax) given log-probabilities `qlog` and a target distribution
  /// `target` of the same shape, averaged over rows. 0 * log 0 counts as 0.
  NodeId kl_divergence(NodeId qlog, Matrix target);
  NodeId sum(NodeId x);

  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  /// Value of a 1x1 node.
  double scalar(NodeId id) const;
  OpKind kind(NodeId id) const { return nodes_.at(id).op; }
  std::span<const NodeId> parents(NodeId id) const { return nodes_.at(id).parents; }
  std::size_t size() const { return nodes_.size(); }
  std::optional<NodeId> parameter_node(std::size_t slot) const;

  /// Reverse sweep from a scalar loss. Returns one gradient per parameter slot
  /// (indexed by slot, shaped like the parameter); slots never registered come
  /// back empty. Throws ContractError if `loss` is not 1x1.
  std::vector<Matrix> backward(NodeId loss) const;

 private:
  struct Node {
    Node(OpKind kind, std::vector<NodeId> from, Matrix v)
        : op(kind), parents(std::move(from)), value(std::move(v)) {}

    OpKind op;
    std::vector<NodeId> parents;
    Matrix value;
    Matrix aux;           // softmax cache or KL target
    double factor = 0.0;  // scale
    std::optional<std::size_t> slot;
    bool needs_grad = false;
  };

  NodeId push(Node node);
  const Node& at(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<std::optional<NodeId>> slot_nodes_;
};

/// Outcome of comparing analytic and central-difference gradients.
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_slot = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds a scalar loss on `graph` from the given parameter values.
using LossBuilder = std::function<NodeId(Graph& graph, std::span<const Matrix> params)>;

/// Hook applied to analytic gradients before comparison (tests use it to
/// inject faults). May be empty.
using GradientHook = std::function<void(std::vector<Matrix>& grads)>;

/// Max over every parameter entry of |analytic - numeric| / max(1, |numeric|)
/// with numeric = (f(w+h) - f(w-h)) / 2h.
GradCheckResult finite_diff_check(const LossBuilder& build, std::vector<Matrix> params, double h,
                                  const GradientHook& hook = {});

}  // namespace gemo
