// Versioned model files: a text header, a JSON manifest (tensor names,
// shapes, offsets, checksums, alphabets, configuration) and one
// little-endian float64 blob holding every tensor row-major.
//
//   POSTAG-CHECKPOINT <version>\n
//   <manifest byte count> <manifest crc32>\n
//   <manifest JSON>
//   <blob>
#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "postag/corpus.hpp"

#include "postag/tensor_map.hpp"

namespace postag {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public InputError {
 public:
  using InputError::InputError;
};
/// Not a checkpoint at all, or an unreadable header.
class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
/// Manifest parses but disagrees with itself or with the blob layout.
class CheckpointManifestError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

struct Checkpoint {
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::vector<std::string>> alphabets;
  TensorMap tensors;
  /// Provenance of the run that produced the file; not interpreted on load.
  nlohmann::json run = nlohmann::json::object();
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_of(std::string_view bytes);
/// crc32 of a file's contents as 8 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
/// Truncates and writes `path`; nothing else is touched.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace postag
