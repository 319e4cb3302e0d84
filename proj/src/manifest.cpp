#include "ntd/manifest.hpp"

#include <chrono>
#include <filesystem>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"

namespace ntd {

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunManifest RunManifest::load_or_new(const std::string& dir) {
  RunManifest m;
  m.dir_ = dir;
  const std::string path = dir + "/manifest.json";
  if (std::filesystem::exists(path)) {
    m.json_ = read_text_file(path);
    const auto parsed = nlohmann::ordered_json::parse(m.json_);  // fail early on corruption
    (void)parsed;
  } else {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["tool_version"] = kToolVersion;
    j["stages"] = nlohmann::ordered_json::array();
    m.json_ = j.dump(2);
  }
  return m;
}

void RunManifest::record_stage(const std::string& stage,
                               const std::string& config_json,
                               const std::map<std::string, std::string>& inputs,
                               const std::map<std::string, std::string>& outputs,
                               double wall_ms) {
  auto j = nlohmann::ordered_json::parse(json_);
  nlohmann::ordered_json entry;
  entry["stage"] = stage;
  entry["config"] = nlohmann::ordered_json::parse(config_json);
  nlohmann::ordered_json in, out;
  for (const auto& [name, path] : inputs) in[name] = {{"path", path}, {"hash", file_content_hash(path)}};
  for (const auto& [name, path] : outputs) out[name] = {{"path", path}, {"hash", file_content_hash(path)}};
  entry["inputs"] = std::move(in);
  entry["outputs"] = std::move(out);
  entry["wall_ms"] = wall_ms;
  entry["timestamp"] = now_iso8601();

  auto& stages = j["stages"];
  bool replaced = false;
  for (auto& s : stages) {
    if (s.at("stage") == stage) {
      s = entry;
      replaced = true;
      break;
    }
  }
  if (!replaced) stages.push_back(std::move(entry));
  json_ = j.dump(2);
}

void RunManifest::save() const {
  std::filesystem::create_directories(dir_);
  write_text_file(dir_ + "/manifest.json", json_ + "\n");
}

std::vector<std::string> RunManifest::verify_hashes() const {
  std::vector<std::string> problems;
  const auto j = nlohmann::ordered_json::parse(json_);
  for (const auto& s : j.at("stages")) {
    for (const char* side : {"inputs", "outputs"}) {
      if (!s.contains(side)) continue;
      for (const auto& [name, rec] : s.at(side).items()) {
        const std::string path = rec.at("path").get<std::string>();
        const std::string want = rec.at("hash").get<std::string>();
        std::string got;
        try {
          got = file_content_hash(path);
        } catch (const std::exception&) {
          problems.push_back(path + ": missing");
          continue;
        }
        if (got != want)
          problems.push_back(path + ": hash " + got + " != recorded " + want);
      }
    }
  }
  return problems;
}

void RunManifest::check_file(const std::string& path) const {
  const auto canon = std::filesystem::weakly_canonical(path).string();
  const auto j = nlohmann::ordered_json::parse(json_);
  for (const auto& s : j.at("stages")) {
    for (const char* side : {"inputs", "outputs"}) {
      if (!s.contains(side)) continue;
      for (const auto& [name, rec] : s.at(side).items()) {
        const std::string rpath = rec.at("path").get<std::string>();
        if (std::filesystem::weakly_canonical(rpath).string() != canon) continue;
        const std::string want = rec.at("hash").get<std::string>();
        const std::string got = file_content_hash(rpath);
        if (got != want)
          throw std::runtime_error(path + ": content hash " + got +
                                   " does not match manifest record " + want);
      }
    }
  }
}

std::string RunManifest::text() const { return json_; }

void check_against_manifest(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return;
  RunManifest m = RunManifest::load_or_new(dir.string());
  m.check_file(path);
}

}  // namespace ntd
