#include "coherentia/encoder.hpp"

#include <string>

namespace coherentia {

Encoding encode_sentence(const RecursiveParams& params, const EmbeddingTable& table,
                         const Sentence& sentence) {
  const int k = params.dim();
  if (table.dim() != k || params.weight.rows() != k || params.weight.cols() != 2 * k) {
    throw ShapeError("encoder: parameter dimension " + std::to_string(k) +
                     " does not match embedding dimension " + std::to_string(table.dim()));
  }
  const auto& nodes = sentence.tree.nodes;
  if (nodes.empty()) throw ShapeError("encoder: empty sentence tree");

  Encoding enc;
  EncodeTrace& trace = enc.trace;
  trace.dim = k;
  trace.root = sentence.tree.root();
  trace.leaf_rows.assign(nodes.size(), table.unk_index());
  trace.is_leaf.assign(nodes.size(), false);
  trace.internal.reserve(sentence.tree.internal_count());

  // Output vector of every node, indexed like the tree. Leaves point into
  // the table; internal nodes into the trace.
  std::vector<const Vector*> value(nodes.size(), nullptr);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) {
      const auto row = table.index_of(sentence.tokens.at(n.token).surface);
      trace.leaf_rows[i] = row;
      trace.is_leaf[i] = true;
      value[i] = &table.row(row);
      continue;
    }
    EncodeTrace::Step step;
    step.node = static_cast<int>(i);
    step.left = n.left;
    step.right = n.right;
    step.input.resize(2 * k);
    step.input << *value[n.left], *value[n.right];
    step.output = (params.weight * step.input + params.bias).array().tanh().matrix();
    trace.internal.push_back(std::move(step));
    value[i] = &trace.internal.back().output;
  }
  // Pointers into trace.internal stay valid: the reserve above covers every
  // internal node.
  enc.root = *value[trace.root];
  return enc;
}

SentenceGradient backprop_sentence(const RecursiveParams& params, const EncodeTrace& trace,
                                   const Vector& grad_root, bool leaf_gradients) {
  const int k = params.dim();
  if (trace.dim != k || grad_root.size() != k) {
    throw ShapeError("backprop_sentence: trace/params dimension mismatch");
  }

  SentenceGradient out;
  out.weight = Matrix::Zero(k, 2 * k);
  out.bias = Vector::Zero(k);

  const std::size_t n = trace.is_leaf.size();
  std::vector<Vector> grad(n, Vector::Zero(k));
  grad[trace.root] = grad_root;

  for (auto it = trace.internal.rbegin(); it != trace.internal.rend(); ++it) {
    const Vector pre = grad[it->node].cwiseProduct((1.0 - it->output.array().square()).matrix());
    out.weight.noalias() += pre * it->input.transpose();
    out.bias += pre;
    const Vector down = params.weight.transpose() * pre;
    grad[it->left] += down.head(k);
    grad[it->right] += down.tail(k);
  }

  if (leaf_gradients) {
    for (std::size_t i = 0; i < n; ++i) {
      if (trace.is_leaf[i]) out.leaves.emplace_back(trace.leaf_rows[i], grad[i]);
    }
  }
  return out;
}

}  // namespace coherentia
