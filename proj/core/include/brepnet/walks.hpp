#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "brepnet/tensor.hpp"
#include "brepnet/topology.hpp"
#include "brepnet/types.hpp"

namespace brepnet {

/// One incidence or permutation operator realized as a row gather: row i of
/// the matrix has a single 1 in column dest[i]. Products of such operators
/// stay in this form, so walk compilation is index composition.
struct WalkMatrix {
  enum class Kind { kCoedgeToCoedge, kCoedgeToFace, kCoedgeToEdge };

  Kind kind = Kind::kCoedgeToCoedge;
  std::vector<Index> dest;  // dest[i] = entity reached from coedge i
  Index num_targets = 0;    // |c|, |f| or |e| depending on kind

  Index num_coedges() const { return static_cast<Index>(dest.size()); }
};

/// The five incidence operators of a solid.
struct Operators {
  WalkMatrix next;  // N
  WalkMatrix prev;  // P = N^-1
  WalkMatrix mate;  // M
  WalkMatrix face;  // F
  WalkMatrix edge;  // E
};

/// Builds N, P, M, F, E from a valid topology. P is derived by inverting N.
/// Throws std::invalid_argument when the topology fails validation.
Operators build_operators(const SolidTopology& topo);

enum class WalkStep { kNext, kPrev, kMate, kEdge, kFace };

class WalkParseError : public std::runtime_error {
 public:
  WalkParseError(std::string message, std::size_t column)
      : std::runtime_error(std::move(message)), column_(column) {}
  /// 1-based position of the offending character ("" reports column 1).
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Parses a walk string over the alphabet {I, N, P, M, E, F}. E and F are
/// terminal hops and may only appear last; I is the identity and contributes
/// no step, so "I" parses to the empty walk.
std::vector<WalkStep> parse_walk(const std::string& text);

/// Composes the named instructions left to right into a single operator,
/// matching the order the matrices are multiplied in.
WalkMatrix compile_walk(const Operators& ops, std::span<const WalkStep> steps);
WalkMatrix compile_walk(const Operators& ops, const std::string& text);
WalkMatrix compile_walk(const SolidTopology& topo, const std::string& text);

/// Ordered walk lists defining a convolution neighborhood.
struct KernelSpec {
  std::string name;
  std::vector<std::string> face_walks;    // K^f, each ends in F
  std::vector<std::string> edge_walks;    // K^e, each ends in E
  std::vector<std::string> coedge_walks;  // K^c, only N/P/M/I

  std::size_t num_walks() const { return face_walks.size() + edge_walks.size() + coedge_walks.size(); }
};

/// Throws std::invalid_argument if any list is empty or a walk terminates on
/// the wrong entity kind for its list.
void validate_kernel(const KernelSpec& spec);

inline constexpr std::array<std::string_view, 7> kKernelPresetNames = {
    "simple_edge",      "asymmetric",       "asymmetric_plus", "asymmetric_plus_plus",
    "winged_edge",      "winged_edge_plus", "winged_edge_plus_plus",
};

/// Returns the named preset kernel. Throws std::invalid_argument for an
/// unknown name.
KernelSpec kernel_preset(const std::string& name);

/// All walk operators of a kernel compiled against one topology.
struct CompiledKernel {
  std::vector<WalkMatrix> face_walks;
  std::vector<WalkMatrix> edge_walks;
  std::vector<WalkMatrix> coedge_walks;
};

CompiledKernel compile_kernel(const Operators& ops, const KernelSpec& spec);
CompiledKernel compile_kernel(const SolidTopology& topo, const KernelSpec& spec);

/// Row gather: output row i is H[dest[i]]. H must have num_targets rows.
template <typename T>
Matrix<T> gather(const WalkMatrix& walk, const Matrix<T>& h) {
  if (h.rows() != walk.num_targets) throw std::invalid_argument("gather: row count does not match walk targets");
  Matrix<T> out(walk.num_coedges(), h.cols());
  for (Index i = 0; i < walk.num_coedges(); ++i) {
    auto src = h.row(walk.dest[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

/// Adjoint of gather: scatter-adds row i of g into row dest[i] of the
/// result. Used by the reverse pass.
template <typename T>
Matrix<T> scatter_add(const WalkMatrix& walk, const Matrix<T>& g) {
  if (g.rows() != walk.num_coedges()) throw std::invalid_argument("scatter_add: row count does not match coedges");
  Matrix<T> out(walk.num_targets, g.cols());
  for (Index i = 0; i < walk.num_coedges(); ++i) {
    auto src = g.row(i);
    auto dst = out.row(walk.dest[i]);
    for (Index j = 0; j < g.cols(); ++j) dst[j] += src[j];
  }
  return out;
}

}  // namespace brepnet
