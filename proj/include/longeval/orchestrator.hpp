#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "longeval/config.hpp"
#include "longeval/gateway.hpp"

namespace longeval {

// Digest-linked record of every artifact a run produced or consumed; the
// contract that makes stages individually re-runnable and reruns auditable.
class Manifest {
 public:
  struct Entry {
    std::string path;  // relative to the run directory
    std::string sha256;
  };

  static Manifest load_or_create(const std::filesystem::path& run_dir,
                                 const std::string& run_id,
                                 std::uint64_t seed,
                                 const std::string& config_digest);

  void record_stage(const std::string& stage,
                    const std::map<std::string, Entry>& inputs,
                    const std::map<std::string, Entry>& artifacts,
                    const nlohmann::json& meta = nlohmann::json::object());

  bool has_stage(const std::string& stage) const;

  // Resolves an artifact produced by an earlier stage and verifies that the
  // file still matches its recorded digest. Throws ArtifactError (for
  // `for_stage`) when missing or stale.
  std::filesystem::path resolve_artifact(const std::string& producer_stage,
                                         const std::string& name,
                                         const std::string& for_stage) const;

  // All artifacts of one stage, digest-verified.
  std::map<std::string, std::filesystem::path> resolve_all(
      const std::string& producer_stage, const std::string& for_stage) const;

  void save() const;
  const nlohmann::json& data() const { return data_; }

 private:
  std::filesystem::path run_dir_;
  std::filesystem::path path_;
  nlohmann::json data_;
};

// Executes pipeline stages against a run directory.
class Runner {
 public:
  struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> run_id;
    std::map<std::string, std::string> backends;  // declared name -> other name
  };

  Runner(LoadedConfig loaded, Overrides overrides = {});
  ~Runner();

  // ingest, parse-coref, index, gen-questions, answer, rate-absolute,
  // rate-sxs, rank, agreement, report.
  static const std::vector<std::string>& stage_names();

  void run_stage(const std::string& stage);
  // Every stage applicable to the configuration, in pipeline order.
  void run_all();

  const Config& config() const { return config_; }
  std::filesystem::path run_dir() const { return run_dir_; }
  Gateway& gateway() { return *gateway_; }
  Backend& backend(const std::string& name);

 private:
  struct Loaded;
  void stage_ingest();
  void stage_parse_coref();
  void stage_index();
  void stage_gen_questions();
  void stage_answer();
  void stage_rate_absolute();
  void stage_rate_sxs();
  void stage_rank();
  void stage_agreement();
  void stage_report();

  Config config_;
  std::string config_digest_;
  std::filesystem::path run_dir_;
  std::unique_ptr<Manifest> manifest_;
  std::unique_ptr<Gateway> gateway_;
  std::map<std::string, std::unique_ptr<Backend>> backends_;
  std::map<std::string, std::string> backend_overrides_;
};

// Builds the mock backend described by a script file: an object with a
// "rules" array ({"substring"|"exact": ..., "response": ...}) and an optional
// "default" response.
std::unique_ptr<MockBackend> make_mock_backend(const std::string& name,
                                               const std::string& script_path);

}  // namespace longeval
