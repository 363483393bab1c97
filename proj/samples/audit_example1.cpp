// Prints the closed-form quantities of the second-order example.
#include <cstdio>

#include "delvar/delvar.hpp"
#include "delvar/registry.hpp"

int main() {
  using namespace delvar;
  const io::ProblemFile f = find_entry("example1").build();
  const IsoperimetricProblem& p = *f.variational;
  const Trajectory& q = *f.trajectory;
  const AugmentedSetup setup{p, *f.lambda};
  std::printf("q(2) = %.17g, qd(2) = %.17g\n", q.eval(2.0, 0, Side::Left)[0], q.eval(2.0, 1, Side::Left)[0]);
  std::printf("J = %.17g, I = %.17g\n", functional_value(p, q), constraint_values(p, q)[0]);
  for (double t : {1.25, 1.5})
    std::printf("dr_quantity(%g) = %.17g\n", t, dr_quantity(setup, q, t, Regime::Second));
  std::printf("cdur_residual(0.5) = %.17g\n", cdur_residual(setup, q, 0.5));
  const ResidualReport rep = verify(p, q, *f.lambda);
  std::printf("el sup = %.3g, hypothesis_violated = %s\n", rep.el_sup(), rep.hypothesis_violated ? "true" : "false");
}
