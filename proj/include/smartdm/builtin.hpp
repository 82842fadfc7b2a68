#ifndef SMARTDM_BUILTIN_HPP
#define SMARTDM_BUILTIN_HPP

#include <string>
#include <vector>

#include "smartdm/objective.hpp"

namespace smartdm {

std::vector<std::string> builtin_names();

// Regenerates one of the named built-in problem instances:
// validation-a, validation-b, example-1 .. example-6, fmri-723.
ProblemSpec builtin_spec(const std::string& name);

}  // namespace smartdm

#endif
