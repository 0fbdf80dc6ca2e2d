#pragma once

#include <deflab/tree_io.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deflab::fixtures {

/// A named example bundle: an optional tree file, named label maps (by leaf
/// index) and scalar parameters as canonical strings.
struct Fixture {
  std::string name;
  std::string summary;
  std::optional<TreeFile> file;
  std::vector<std::pair<std::string, std::vector<std::string>>> label_maps;
  std::vector<std::pair<std::string, std::string>> params;

  const std::vector<std::string>& labels(const std::string& map_name) const;
};

std::vector<std::string> names();

/// Throws ValidationError listing the available names.
Fixture make(const std::string& name);

// One step, S: 1 -> (2, 1/2), P = (1/2, 1/2).
TreeFile binomial();
// Two independent repetitions of the binomial step.
TreeFile two_step_binomial();
// One leaf, S: 1 -> 2.
TreeFile deterministic_drift();

}  // namespace deflab::fixtures
