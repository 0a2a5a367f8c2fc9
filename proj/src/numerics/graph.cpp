// SPDX-License-Identifier: Apache-2.0
#include "gemo/numerics/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gemo/errors.hpp"
#include "gemo/numerics/kernels.hpp"

namespace gemo {
namespace {

void accumulate(Matrix& dst, const Matrix& src) {
  if (dst.empty()) {
    dst = src;
    return;
  }
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

const Graph::Node& Graph::at(NodeId id) const {
  if (id >= nodes_.size()) throw ContractError("graph: unknown node " + std::to_string(id));
  return nodes_[id];
}

NodeId Graph::push(Node node) {
  for (NodeId p : node.parents) {
    if (nodes_[p].needs_grad) node.needs_grad = true;
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Graph::constant(Matrix value) {
  return push(Node(OpKind::kConstant, {}, std::move(value)));
}

NodeId Graph::parameter(std::size_t slot, const Matrix& value) {
  if (slot < slot_nodes_.size() && slot_nodes_[slot]) return *slot_nodes_[slot];
  if (slot >= slot_nodes_.size()) slot_nodes_.resize(slot + 1);
  Node n(OpKind::kParameter, {}, value);
  n.slot = slot;
  n.needs_grad = true;
  const NodeId id = push(std::move(n));
  slot_nodes_[slot] = id;
  return id;
}

std::optional<NodeId> Graph::parameter_node(std::size_t slot) const {
  return slot < slot_nodes_.size() ? slot_nodes_[slot] : std::nullopt;
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  return push(Node(OpKind::kMatMul, {a, b}, gemo::matmul(at(a).value, at(b).value)));
}

NodeId Graph::matmul_nt(NodeId a, NodeId b) {
  return push(Node(OpKind::kMatMulNT, {a, b}, gemo::matmul_nt(at(a).value, at(b).value)));
}

NodeId Graph::transpose(NodeId a) {
  return push(Node(OpKind::kTranspose, {a}, gemo::transpose(at(a).value)));
}

NodeId Graph::add_row(NodeId x, NodeId bias) {
  const Matrix& xv = at(x).value;
  const Matrix& bv = at(bias).value;
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_row: cannot broadcast " + bv.shape_string() + " onto " +
                         xv.shape_string());
  }
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bv(0, j);
  }
  return push(Node(OpKind::kAddRow, {x, bias}, std::move(out)));
}

NodeId Graph::add(NodeId a, NodeId b) {
  return push(Node(OpKind::kAdd, {a, b}, gemo::add(at(a).value, at(b).value)));
}

NodeId Graph::scale(NodeId x, double factor) {
  Node n{OpKind::kScale, {x}, gemo::scale(at(x).value, factor)};
  n.factor = factor;
  return push(std::move(n));
}

NodeId Graph::relu(NodeId x) {
  Matrix out = at(x).value;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return push(Node(OpKind::kRelu, {x}, std::move(out)));
}

NodeId Graph::mean_rows(NodeId seq) {
  return push(Node(OpKind::kMeanRows, {seq}, gemo::mean_rows(at(seq).value)));
}

NodeId Graph::stack_rows(std::span<const NodeId> parts) {
  std::vector<Matrix> values;
  values.reserve(parts.size());
  for (NodeId p : parts) values.push_back(at(p).value);
  return push(Node(OpKind::kStackRows, {parts.begin(), parts.end()}, gemo::stack_rows(values)));
}

NodeId Graph::row_log_softmax(NodeId x) {
  Matrix out = gemo::row_log_softmax(at(x).value);
  Matrix probs = out;
  for (double& v : probs.data()) v = std::exp(v);
  Node n{OpKind::kRowLogSoftmax, {x}, std::move(out)};
  n.aux = std::move(probs);
  return push(std::move(n));
}

NodeId Graph::kl_divergence(NodeId qlog, Matrix target) {
  const Matrix& q = at(qlog).value;
  if (!q.same_shape(target)) {
    throw DimensionError("kl_divergence: logits " + q.shape_string() + " vs target " +
                         target.shape_string());
  }
  if (q.rows() == 0) throw DimensionError("kl_divergence: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = target.data()[i];
    if (p > 0.0) total += p * (std::log(p) - q.data()[i]);
  }
  Node n{OpKind::kKLDivergence, {qlog}, Matrix(1, 1, total / static_cast<double>(q.rows()))};
  n.aux = std::move(target);
  return push(std::move(n));
}

NodeId Graph::sum(NodeId x) {
  return push(Node(OpKind::kSum, {x}, Matrix(1, 1, gemo::sum(at(x).value))));
}

double Graph::scalar(NodeId id) const {
  const Matrix& v = at(id).value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("scalar: node " + std::to_string(id) + " has shape " + v.shape_string());
  }
  return v(0, 0);
}

std::vector<Matrix> Graph::backward(NodeId loss) const {
  const Node& root = at(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward: loss node must be 1x1, got " + root.value.shape_string());
  }
  std::vector<Matrix> grad(loss + 1);
  grad[loss] = Matrix(1, 1, 1.0);

  auto flows = [&](NodeId p) { return nodes_[p].needs_grad; };

  for (NodeId id = loss + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || grad[id].empty()) continue;
    const Matrix& g = grad[id];
    switch (n.op) {
      case OpKind::kConstant:
      case OpKind::kParameter:
        break;
      case OpKind::kMatMul: {
        const NodeId a = n.parents[0], b = n.parents[1];
        if (flows(a)) accumulate(grad[a], gemo::matmul_nt(g, nodes_[b].value));
        if (flows(b)) accumulate(grad[b], gemo::matmul_tn(nodes_[a].value, g));
        break;
      }
      case OpKind::kMatMulNT: {
        const NodeId a = n.parents[0], b = n.parents[1];
        if (flows(a)) accumulate(grad[a], gemo::matmul(g, nodes_[b].value));
        if (flows(b)) accumulate(grad[b], gemo::matmul_tn(g, nodes_[a].value));
        break;
      }
      case OpKind::kTranspose:
        accumulate(grad[n.parents[0]], gemo::transpose(g));
        break;
      case OpKind::kAddRow: {
        const NodeId x = n.parents[0], b = n.parents[1];
        if (flows(x)) accumulate(grad[x], g);
        if (flows(b)) {
          Matrix db(1, g.cols());
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
          accumulate(grad[b], db);
        }
        break;
      }
      case OpKind::kAdd:
        for (NodeId p : n.parents)
          if (flows(p)) accumulate(grad[p], g);
        break;
      case OpKind::kScale:
        accumulate(grad[n.parents[0]], gemo::scale(g, n.factor));
        break;
      case OpKind::kRelu: {
        Matrix d = g;
        const Matrix& out = n.value;
        for (std::size_t i = 0; i < d.size(); ++i)
          if (!(out.data()[i] > 0.0)) d.data()[i] = 0.0;
        accumulate(grad[n.parents[0]], d);
        break;
      }
      case OpKind::kMeanRows: {
        const Matrix& x = nodes_[n.parents[0]].value;
        Matrix d(x.rows(), x.cols());
        const double inv = 1.0 / static_cast<double>(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < x.cols(); ++j) d(i, j) = g(0, j) * inv;
        accumulate(grad[n.parents[0]], d);
        break;
      }
      case OpKind::kStackRows: {
        std::size_t offset = 0;
        for (NodeId p : n.parents) {
          const Matrix& pv = nodes_[p].value;
          if (flows(p)) {
            Matrix d(pv.rows(), pv.cols());
            for (std::size_t i = 0; i < pv.rows(); ++i)
              for (std::size_t j = 0; j < pv.cols(); ++j) d(i, j) = g(offset + i, j);
            accumulate(grad[p], d);
          }
          offset += pv.rows();
        }
        break;
      }
      case OpKind::kRowLogSoftmax: {
        // dx = dy - softmax(x) * rowsum(dy)
        const Matrix& probs = n.aux;
        Matrix d = g;
        for (std::size_t i = 0; i < d.rows(); ++i) {
          double row_total = 0.0;
          for (double v : g.row(i)) row_total += v;
          auto r = d.row(i);
          for (std::size_t j = 0; j < r.size(); ++j) r[j] -= probs(i, j) * row_total;
        }
        accumulate(grad[n.parents[0]], d);
        break;
      }
      case OpKind::kKLDivergence: {
        const double coeff = -g(0, 0) / static_cast<double>(n.aux.rows());
        accumulate(grad[n.parents[0]], gemo::scale(n.aux, coeff));
        break;
      }
      case OpKind::kSum: {
        const Matrix& x = nodes_[n.parents[0]].value;
        accumulate(grad[n.parents[0]], Matrix(x.rows(), x.cols(), g(0, 0)));
        break;
      }
    }
  }

  std::vector<Matrix> out(slot_nodes_.size());
  for (std::size_t slot = 0; slot < slot_nodes_.size(); ++slot) {
    if (!slot_nodes_[slot]) continue;
    const NodeId id = *slot_nodes_[slot];
    const Matrix& value = nodes_[id].value;
    out[slot] = (id <= loss && !grad[id].empty()) ? grad[id] : Matrix(value.rows(), value.cols());
  }
  return out;
}

GradCheckResult finite_diff_check(const LossBuilder& build, std::vector<Matrix> params, double h,
                                  const GradientHook& hook) {
  if (!(h > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  Graph graph;
  const NodeId loss = build(graph, params);
  std::vector<Matrix> analytic = graph.backward(loss);
  analytic.resize(params.size());
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (analytic[s].empty()) analytic[s] = Matrix(params[s].rows(), params[s].cols());
  }
  if (hook) hook(analytic);

  auto evaluate = [&]() {
    Graph g;
    return g.scalar(build(g, params));
  };

  GradCheckResult result;
  for (std::size_t s = 0; s < params.size(); ++s) {
    auto values = params[s].data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + h;
      const double up = evaluate();
      values[k] = saved - h;
      const double down = evaluate();
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[s].data()[k];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (err > result.max_rel_error || std::isnan(err)) {
        result = {std::isnan(err) ? INFINITY : err, s, k, a, numeric};
      }
    }
  }
  return result;
}

}  // namespace gemo
