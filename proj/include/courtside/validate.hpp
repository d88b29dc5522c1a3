#pragma once

#include <vector>

#include "courtside/model.hpp"

namespace courtside {

struct ValidationReport {
  std::vector<Diagnostic> entries;

  bool empty() const { return entries.empty(); }
  bool has_errors() const;
};

// Checks every structural invariant of an analyzed bundle. Violations are
// report entries, never exceptions. Server/previous-winner mismatches are
// warnings since lets and faults can legitimately break the pattern.
ValidationReport validate_bundle(const MatchBundle& bundle);

}  // namespace courtside
