#pragma once

#include <ostream>

namespace memlab {

// Runs the full acceptance suite, printing one pass/fail line per criterion.
// Returns the number of failed criteria.
int run_acceptance(std::ostream& out);

}  // namespace memlab
