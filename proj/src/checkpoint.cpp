#include "postag/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace postag {

namespace {

constexpr std::string_view kMagic = "POSTAG-CHECKPOINT";

void append_le(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xFF);
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string_view next_line(std::string_view bytes, std::size_t& pos) {
  const auto nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) throw CheckpointTruncatedError("checkpoint header is truncated");
  auto line = bytes.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

}  // namespace

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string file_digest(const std::filesystem::path& path) { return hex32(crc32_of(read_file(path))); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string blob;
  blob.reserve(ckpt.tensors.parameter_count() * 8);
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& e : ckpt.tensors) {
    const std::size_t offset = blob.size();
    for (double v : e.tensor.data()) append_le(blob, v);
    tensors.push_back({{"name", e.name},
                       {"shape", e.tensor.shape()},
                       {"offset", offset},
                       {"bytes", blob.size() - offset},
                       {"crc32", hex32(crc32_of(std::string_view(blob).substr(offset)))}});
  }
  nlohmann::json manifest = {
      {"format_version", kCheckpointVersion},
      {"kind", ckpt.kind},
      {"config", ckpt.config},
      {"alphabets", ckpt.alphabets},
      {"tensors", tensors},
      {"blob_bytes", blob.size()},
      {"blob_crc32", hex32(crc32_of(blob))},
      {"run", ckpt.run},
  };
  const std::string text = manifest.dump(1);
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kCheckpointVersion) + "\n";
  out += std::to_string(text.size()) + " " + hex32(crc32_of(text)) + "\n";
  out += text;
  out += blob;
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw CheckpointFormatError("not a checkpoint file");
  std::size_t pos = 0;
  const auto header = next_line(bytes, pos);
  const auto digits = header.size() > kMagic.size() + 1 ? header.substr(kMagic.size() + 1) : std::string_view{};
  if (digits.empty() || header[kMagic.size()] != ' ' || digits.size() > 9 ||
      digits.find_first_not_of("0123456789") != std::string_view::npos) {
    throw CheckpointFormatError("unreadable checkpoint version");
  }
  const int version = std::stoi(std::string(digits));
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }
  const auto sizes = std::string(next_line(bytes, pos));
  std::size_t manifest_bytes = 0;
  std::string manifest_crc;
  {
    std::istringstream ss(sizes);
    if (!(ss >> manifest_bytes >> manifest_crc)) throw CheckpointFormatError("unreadable manifest header");
  }
  if (bytes.size() - pos < manifest_bytes) throw CheckpointTruncatedError("checkpoint manifest is truncated");
  const auto text = bytes.substr(pos, manifest_bytes);
  pos += manifest_bytes;
  if (hex32(crc32_of(text)) != manifest_crc) throw CheckpointChecksumError("checkpoint manifest checksum mismatch");

  nlohmann::json manifest;
  Checkpoint ckpt;
  std::size_t blob_bytes = 0;
  std::string blob_crc;
  try {
    manifest = nlohmann::json::parse(text);
    if (manifest.at("format_version").get<int>() != version) {
      throw CheckpointManifestError("manifest version disagrees with header");
    }
    ckpt.kind = manifest.at("kind").get<std::string>();
    ckpt.config = manifest.at("config");
    ckpt.alphabets = manifest.at("alphabets").get<std::map<std::string, std::vector<std::string>>>();
    ckpt.run = manifest.value("run", nlohmann::json::object());
    blob_bytes = manifest.at("blob_bytes").get<std::size_t>();
    blob_crc = manifest.at("blob_crc32").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointManifestError(std::string("malformed manifest: ") + e.what());
  }

  const std::size_t available = bytes.size() - pos;
  if (available < blob_bytes) {
    throw CheckpointTruncatedError("checkpoint blob has " + std::to_string(available) + " bytes, manifest declares " +
                                   std::to_string(blob_bytes));
  }
  if (available > blob_bytes) throw CheckpointManifestError("trailing bytes after checkpoint blob");
  const auto blob = bytes.substr(pos, blob_bytes);
  if (hex32(crc32_of(blob)) != blob_crc) throw CheckpointChecksumError("checkpoint blob checksum mismatch");

  std::size_t expected_offset = 0;
  try {
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto nbytes = t.at("bytes").get<std::size_t>();
      std::size_t count = shape.empty() ? 0 : 1;
      for (auto d : shape) count *= d;
      if (count == 0 || count * 8 != nbytes) {
        throw CheckpointManifestError("tensor '" + name + "': shape " + ad::shape_string(shape) + " disagrees with " +
                                      std::to_string(nbytes) + " bytes");
      }
      if (offset != expected_offset || offset + nbytes > blob.size()) {
        throw CheckpointManifestError("tensor '" + name + "' has an inconsistent offset");
      }
      const auto slice = blob.substr(offset, nbytes);
      if (hex32(crc32_of(slice)) != t.at("crc32").get<std::string>()) {
        throw CheckpointChecksumError("checksum mismatch in tensor '" + name + "'");
      }
      std::vector<double> data(count);
      for (std::size_t i = 0; i < count; ++i) data[i] = read_le(slice.data() + 8 * i);
      if (ckpt.tensors.contains(name)) throw CheckpointManifestError("tensor '" + name + "' listed twice");
      ckpt.tensors.add(name, ad::Tensor(shape, std::move(data)));
      expected_offset = offset + nbytes;
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointManifestError(std::string("malformed tensor entry: ") + e.what());
  }
  if (expected_offset != blob.size()) throw CheckpointManifestError("blob holds bytes not owned by any tensor");
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace postag
