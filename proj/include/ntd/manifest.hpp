#pragma once

#include <map>
#include <string>
#include <vector>

namespace ntd {

/// Per-run provenance ledger kept as manifest.json in each output
/// directory. Stages record their config, seeds, input/output file hashes
/// and wall time. Timestamps live only here; every other output file is a
/// pure function of (inputs, flags, seed).
class RunManifest {
 public:
  /// Loads dir/manifest.json or starts a fresh one.
  static RunManifest load_or_new(const std::string& dir);

  /// Replaces (or appends) the entry for `stage`. Paths in `inputs` and
  /// `outputs` are hashed at call time.
  void record_stage(const std::string& stage, const std::string& config_json,
                    const std::map<std::string, std::string>& inputs,
                    const std::map<std::string, std::string>& outputs,
                    double wall_ms);

  void save() const;

  /// Checks every recorded file hash against current content.
  /// Returns a list of mismatch descriptions (empty = all good).
  std::vector<std::string> verify_hashes() const;

  /// If `path` is recorded in this manifest, checks its hash and throws
  /// std::runtime_error on mismatch. Unrecorded paths pass silently.
  void check_file(const std::string& path) const;

  const std::string& dir() const { return dir_; }
  std::string text() const;

 private:
  std::string dir_;
  std::string json_;  // serialized document
};

/// Convenience: verify `path` against the manifest sitting next to it, if
/// one exists.
void check_against_manifest(const std::string& path);

}  // namespace ntd
