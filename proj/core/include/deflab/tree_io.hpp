#pragma once

#include <deflab/filtered_space.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace deflab {

/// Contents of a tree file. Named tables keep their file order so that
/// serialize(parse(text)) reproduces canonical input byte for byte.
struct TreeFile {
  EventTree tree;
  std::optional<ProbMeasure> P;
  std::vector<std::pair<std::string, AdaptedProcess>> processes;
  std::vector<std::pair<std::string, Strategy>> strategies;

  const AdaptedProcess& process(const std::string& name) const;
  const Strategy& strategy(const std::string& name) const;
  const ProbMeasure& measure() const;

  /// Inserts or replaces.
  void set_process(const std::string& name, AdaptedProcess value);
  void set_strategy(const std::string& name, Strategy value);
};

/// Parses the JSON tree format. Every rational field must be a canonical
/// "p/q" string; errors are ParseError / ValidationError naming the field.
TreeFile parse_tree_file(std::string_view text);

/// Canonical JSON (two-space indent, trailing newline).
std::string serialize_tree_file(const TreeFile& file);

/// {leaf_id: "label"} covering every leaf; returns labels by leaf index.
std::vector<std::string> parse_label_map(std::string_view text, const EventTree& tree);
std::string serialize_label_map(const EventTree& tree, const std::vector<std::string>& labels);

std::string read_text_file(const std::string& path);

/// Writes to a sibling temporary and renames it into place.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace deflab
