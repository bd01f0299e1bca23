#include "brepnet/walks.hpp"

#include <numeric>
#include <stdexcept>

namespace brepnet {
namespace {

std::vector<Index> identity_dest(Index n) {
  std::vector<Index> dest(static_cast<std::size_t>(n));
  std::iota(dest.begin(), dest.end(), Index{0});
  return dest;
}

}  // namespace

Operators build_operators(const SolidTopology& topo) {
  const ValidationReport report = validate(topo);
  if (!report.ok()) {
    throw std::invalid_argument("build_operators: invalid topology: " + report.issues.front().message);
  }

  const Index nc = topo.num_coedges();
  Operators ops;
  ops.next = {WalkMatrix::Kind::kCoedgeToCoedge, topo.coedge_next, nc};
  ops.mate = {WalkMatrix::Kind::kCoedgeToCoedge, topo.coedge_mate, nc};
  ops.face = {WalkMatrix::Kind::kCoedgeToFace, topo.coedge_face, topo.num_faces};
  ops.edge = {WalkMatrix::Kind::kCoedgeToEdge, topo.coedge_edge, topo.num_edges};

  // P = N^-1: invert the permutation.
  std::vector<Index> prev(static_cast<std::size_t>(nc));
  for (Index i = 0; i < nc; ++i) prev[topo.coedge_next[i]] = i;
  ops.prev = {WalkMatrix::Kind::kCoedgeToCoedge, std::move(prev), nc};
  return ops;
}

std::vector<WalkStep> parse_walk(const std::string& text) {
  if (text.empty()) throw WalkParseError("empty walk string", 1);
  std::vector<WalkStep> steps;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char c = text[pos];
    const std::size_t column = pos + 1;
    switch (c) {
      case 'I':
        break;  // identity contributes no step
      case 'N':
        steps.push_back(WalkStep::kNext);
        break;
      case 'P':
        steps.push_back(WalkStep::kPrev);
        break;
      case 'M':
        steps.push_back(WalkStep::kMate);
        break;
      case 'E':
      case 'F':
        if (pos + 1 != text.size()) {
          throw WalkParseError(std::string("terminal instruction '") + c + "' before end of walk", column);
        }
        steps.push_back(c == 'E' ? WalkStep::kEdge : WalkStep::kFace);
        break;
      default:
        throw WalkParseError(std::string("illegal walk character '") + c + "'", column);
    }
  }
  return steps;
}

WalkMatrix compile_walk(const Operators& ops, std::span<const WalkStep> steps) {
  const Index nc = ops.next.num_coedges();
  WalkMatrix out{WalkMatrix::Kind::kCoedgeToCoedge, identity_dest(nc), nc};
  for (const WalkStep step : steps) {
    const WalkMatrix* op = nullptr;
    switch (step) {
      case WalkStep::kNext: op = &ops.next; break;
      case WalkStep::kPrev: op = &ops.prev; break;
      case WalkStep::kMate: op = &ops.mate; break;
      case WalkStep::kEdge: op = &ops.edge; break;
      case WalkStep::kFace: op = &ops.face; break;
    }
    // Instructions execute left to right: row i moves to op->dest[current].
    for (Index i = 0; i < nc; ++i) out.dest[i] = op->dest[out.dest[i]];
    out.kind = op->kind;
    out.num_targets = op->num_targets;
  }
  return out;
}

WalkMatrix compile_walk(const Operators& ops, const std::string& text) {
  const std::vector<WalkStep> steps = parse_walk(text);
  return compile_walk(ops, std::span<const WalkStep>(steps));
}

WalkMatrix compile_walk(const SolidTopology& topo, const std::string& text) {
  return compile_walk(build_operators(topo), text);
}

void validate_kernel(const KernelSpec& spec) {
  if (spec.face_walks.empty() || spec.edge_walks.empty() || spec.coedge_walks.empty()) {
    throw std::invalid_argument("kernel '" + spec.name + "': walk lists must be non-empty");
  }
  auto terminal = [](const std::string& walk) -> char {
    const std::vector<WalkStep> steps = parse_walk(walk);
    if (steps.empty()) return 'I';
    switch (steps.back()) {
      case WalkStep::kEdge: return 'E';
      case WalkStep::kFace: return 'F';
      default: return 'C';
    }
  };
  for (const auto& w : spec.face_walks) {
    if (terminal(w) != 'F') throw std::invalid_argument("kernel '" + spec.name + "': face walk '" + w + "' must end in F");
  }
  for (const auto& w : spec.edge_walks) {
    if (terminal(w) != 'E') throw std::invalid_argument("kernel '" + spec.name + "': edge walk '" + w + "' must end in E");
  }
  for (const auto& w : spec.coedge_walks) {
    const char t = terminal(w);
    if (t == 'E' || t == 'F') {
      throw std::invalid_argument("kernel '" + spec.name + "': coedge walk '" + w + "' must stay on coedges");
    }
  }
}

KernelSpec kernel_preset(const std::string& name) {
  KernelSpec spec;
  spec.name = name;
  spec.face_walks = {"F", "MF"};
  if (name == "simple_edge") {
    spec.edge_walks = {"E"};
    spec.coedge_walks = {"I", "M"};
  } else if (name == "asymmetric") {
    spec.edge_walks = {"E"};
    spec.coedge_walks = {"I", "N"};
  } else if (name == "asymmetric_plus") {
    spec.edge_walks = {"E"};
    spec.coedge_walks = {"I", "M", "N"};
  } else if (name == "asymmetric_plus_plus") {
    spec.edge_walks = {"E", "NE"};
    spec.coedge_walks = {"I", "M", "N"};
  } else if (name == "winged_edge") {
    spec.edge_walks = {"E", "NE", "PE", "MNE", "MPE"};
    spec.coedge_walks = {"I", "M", "N", "P", "MN", "MP"};
  } else if (name == "winged_edge_plus") {
    spec.edge_walks = {"E", "NE", "PE", "MNE", "MPE"};
    spec.coedge_walks = {"I", "M", "N", "NM", "P", "PM", "MN", "MNM", "MP", "MPM"};
  } else if (name == "winged_edge_plus_plus") {
    spec.edge_walks = {"E", "NE", "PE", "MNE", "MPE", "NMNE", "PMPE", "MPMPE", "MNMNE"};
    spec.coedge_walks = {"I", "M", "N", "NM", "P", "PM", "MN", "MNM", "MP", "MPM", "NMN", "PMP", "MPMP", "MNMN"};
  } else {
    throw std::invalid_argument("unknown kernel preset '" + name + "'");
  }
  validate_kernel(spec);
  return spec;
}

CompiledKernel compile_kernel(const Operators& ops, const KernelSpec& spec) {
  validate_kernel(spec);
  CompiledKernel out;
  out.face_walks.reserve(spec.face_walks.size());
  out.edge_walks.reserve(spec.edge_walks.size());
  out.coedge_walks.reserve(spec.coedge_walks.size());
  for (const auto& w : spec.face_walks) out.face_walks.push_back(compile_walk(ops, w));
  for (const auto& w : spec.edge_walks) out.edge_walks.push_back(compile_walk(ops, w));
  for (const auto& w : spec.coedge_walks) out.coedge_walks.push_back(compile_walk(ops, w));
  return out;
}

CompiledKernel compile_kernel(const SolidTopology& topo, const KernelSpec& spec) {
  return compile_kernel(build_operators(topo), spec);
}

}  // namespace brepnet
