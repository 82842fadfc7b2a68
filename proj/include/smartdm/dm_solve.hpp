#ifndef SMARTDM_DM_SOLVE_HPP
#define SMARTDM_DM_SOLVE_HPP

#include "smartdm/nlp.hpp"
#include "smartdm/objective.hpp"
#include "smartdm/pgd.hpp"

namespace smartdm {

// Flattens (Z, contrasts) into one variable vector, expresses Z A = B and
// C c = d as equality constraints, and hands the problem to the augmented
// Lagrangian solver. Returns the same result type as the projected-gradient
// path so the two can be compared head to head.
OptimizationResult solve_dm_problem(const ProblemSpec& spec,
                                    const AssembledObjective& assembled,
                                    const Matrix& init_Z,
                                    const std::vector<Vector>& init_contrasts,
                                    const nlp::SolverOptions& options = {});

}  // namespace smartdm

#endif
