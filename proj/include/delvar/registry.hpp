#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "delvar/io.hpp"

namespace delvar {

struct RegistryEntry {
  std::string name;
  /// Problem document in the problem-file format.
  std::string_view document;

  io::ProblemFile build() const {
    io::ProblemFile f = io::problem_from_json(io::parse_json(std::string(document)));
    f.name = name;
    return f;
  }
};

namespace detail {

inline constexpr std::string_view kExample1 = R"doc({
  "type": "variational",
  "description": "second-order delayed problem on [0, 2] with tau = 1 and a piecewise quartic candidate",
  "m": 2, "n": 1, "k": 1, "tau": 1, "t1": 0, "t2": 2,
  "L": "(qdd + qdd_tau)^2",
  "g": ["(qd + qd_tau)^2"],
  "l": [249.6],
  "history": "-t^4",
  "boundary": {"q": [-14], "qd": [-32]},
  "lambda": [0],
  "trajectory": {
    "n": 1, "m": 2, "nonsmooth_knots": [1],
    "segments": [
      {"a": -1, "b": 0, "coeffs": [[0, 0, 0, 0, -1]]},
      {"a": 0, "b": 1, "coeffs": [[0, 0, 0, 0, 1]]},
      {"a": 1, "b": 2, "coeffs": [[2, 0, 0, 0, -1]]}
    ]
  },
  "expected": {"J": 672, "I": [249.6]}
})doc";

inline constexpr std::string_view kClassical = R"doc({
  "type": "variational",
  "description": "first-order problem with an unused delay; extremal t(1 - t), lambda = 4",
  "m": 1, "n": 1, "k": 1, "tau": 0.5, "t1": 0, "t2": 1,
  "L": "qd^2",
  "g": ["q"],
  "l": [0.16666666666666666],
  "history": "t*(1 - t)",
  "boundary": {"q": [0]},
  "lambda": [4],
  "trajectory": {
    "n": 1, "m": 2,
    "segments": [{"a": -0.5, "b": 1, "coeffs": [[0, 1, -1]]}]
  },
  "expected": {"J": 0.33333333333333331, "I": [0.16666666666666666]},
  "checks": {"solve": true}
})doc";

inline constexpr std::string_view kAutonomousLq = R"doc({
  "type": "control",
  "description": "delayed linear-quadratic control, free end with p(1) = 0",
  "n": 1, "mc": 1, "tau": 0.5, "t1": 0, "t2": 1,
  "L": "u^2",
  "phi": ["q_tau + u"],
  "history": "0",
  "control_history": "0",
  "checks": {"hamiltonian_constant": true}
})doc";

inline constexpr std::string_view kDelayedLqFixed = R"doc({
  "type": "control",
  "description": "delayed linear-quadratic control steered to q(1) = 1",
  "n": 1, "mc": 1, "tau": 0.5, "t1": 0, "t2": 1,
  "L": "u^2",
  "phi": ["q_tau + u"],
  "history": "0",
  "control_history": "0",
  "terminal_state": [1]
})doc";

}  // namespace detail

inline const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries{
      {"example1", detail::kExample1},
      {"classical-isoperimetric", detail::kClassical},
      {"autonomous-lq", detail::kAutonomousLq},
      {"delayed-lq-fixed", detail::kDelayedLqFixed},
  };
  return entries;
}

inline const RegistryEntry& find_entry(std::string_view name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw Error(ErrorCode::InvalidInput, "no registry entry named '" + std::string(name) + "'");
}

}  // namespace delvar
