// Flat key=value run configuration. Keys are the field names of ArchConfig
// and TrainConfig; '#' starts a comment.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include <json.hpp>

#include "postag/tagger.hpp"
#include "postag/training.hpp"

namespace postag {

struct RunConfig {
  tagger::ArchConfig arch;
  training::TrainConfig train;
};

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Applies `values` on top of `config`. Unknown keys and unparsable values
/// throw std::invalid_argument.
void apply(RunConfig& config, const std::map<std::string, std::string>& values);

/// Every field with its resolved value, in key=value form.
std::string to_key_values(const RunConfig& config);
nlohmann::json to_json(const RunConfig& config);

}  // namespace postag
