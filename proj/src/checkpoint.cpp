#include "bat/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bat::harness {
namespace {

constexpr char kMagic[4] = {'B', 'A', 'T', 'C'};
constexpr uint32_t kVersion = 1;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::runtime_error(path + ": " + message);
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(path, "truncated checkpoint");
  return value;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod(out, static_cast<uint64_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::string& path) {
  const uint64_t n = read_pod<uint64_t>(in, path);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) fail(path, "truncated checkpoint");
  return s;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, const std::string& path, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) fail(path, "truncated checkpoint");
}

}  // namespace

void save_checkpoint(const std::string& path, const model::BatModel& model,
                     const objective::AdamState& adam, const RunConfig& config,
                     int epoch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_string(out, serialize_config(config));
  write_pod(out, static_cast<int32_t>(epoch));
  write_pod(out, static_cast<int64_t>(adam.step));
  const auto& params = model.store().params();
  write_pod(out, static_cast<uint64_t>(params.size()));
  for (const auto& p : params) {
    write_string(out, p->name);
    write_pod(out, static_cast<uint64_t>(p->shape.size()));
    for (std::size_t dim : p->shape) write_pod(out, static_cast<uint64_t>(dim));
    write_doubles(out, p->value);
    write_doubles(out, p->m);
    write_doubles(out, p->v);
  }
  if (!out) fail(path, "write failed");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(path, "checkpoint magic mismatch (not a checkpoint or wrong format version)");
  const uint32_t version = read_pod<uint32_t>(in, path);
  if (version != kVersion)
    fail(path, "unsupported checkpoint version " + std::to_string(version));

  LoadedCheckpoint loaded;
  const std::string config_text = read_string(in, path);
  std::istringstream config_stream(config_text);
  std::string line;
  while (std::getline(config_stream, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(path, "malformed embedded config");
    apply_config_entry(loaded.config, line.substr(0, eq), line.substr(eq + 1));
  }
  loaded.epoch = read_pod<int32_t>(in, path);
  loaded.adam.step = read_pod<int64_t>(in, path);

  loaded.model = std::make_unique<model::BatModel>(loaded.config.model,
                                                   loaded.config.seed);
  const uint64_t count = read_pod<uint64_t>(in, path);
  if (count != loaded.model->store().params().size())
    fail(path, "checkpoint parameter count mismatch");
  for (uint64_t i = 0; i < count; ++i) {
    const std::string name = read_string(in, path);
    nn::Param* p = loaded.model->store().find(name);
    if (p == nullptr) fail(path, "unknown checkpoint parameter '" + name + "'");
    const uint64_t rank = read_pod<uint64_t>(in, path);
    ad::Shape shape(rank);
    for (uint64_t d = 0; d < rank; ++d)
      shape[d] = static_cast<std::size_t>(read_pod<uint64_t>(in, path));
    if (shape != p->shape)
      fail(path, "shape mismatch for checkpoint parameter '" + name + "'");
    read_doubles(in, path, p->value);
    read_doubles(in, path, p->m);
    read_doubles(in, path, p->v);
  }
  return loaded;
}

}  // namespace bat::harness
