#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "exmap/dgp.hpp"
#include "exmap/validity.hpp"

namespace exmap {

enum class Command { Simulate, TestValidity, EstimateDirect, ReproduceTable1, ReproduceTable2 };

const char* command_name(Command c);
Command command_from_name(const std::string& name);

// One Monte Carlo run: which command over which (setting, n) grid, how many
// replications, and every knob the pipeline exposes. Zero-valued knobs mean
// "resolve a sensible default for me".
struct RunSpec {
  Command command = Command::TestValidity;
  std::vector<Setting> settings;
  std::vector<int> n_list;
  int replications = 200;
  std::uint64_t base_seed = 20250801;
  std::string output_dir;
  int L = 4;
  int folds = 0;             // 0: 5-fold cross-fitting
  int hidden_width = 16;
  double learning_rate = 0.01;
  int epochs = 200;
  int workers = 0;           // 0: hardware concurrency
  double radius_constant = 0.0;  // 0: 30, or 5 for the threshold design
  int direct_threshold = 2;
  bool check = false;

  void resolve_defaults();
};

struct ReplicationRecord {
  Command kind = Command::TestValidity;
  Setting setting = Setting::S1;
  int n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  // validity-test outputs
  double theta_hat = 0.0;
  double std_error = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  bool reject = false;
  int effective_L = 0;
  // direct-effect outputs
  double gamma_hat = 0.0;
  double gamma_se = 0.0;
  // diagnostics
  double corr_learned_true = 0.0;
  bool flagged = false;
  std::string flag_reason;
};

// Deterministic per-replication work unit; seeds derive from
// (base_seed, setting, n, rep) so any record can be regenerated alone.
ReplicationRecord run_replication(const RunSpec& spec, Setting setting, int n, int rep);

struct TableCell {
  Setting setting = Setting::S1;
  int n = 0;
  int reps_total = 0;
  int reps_flagged = 0;
  double rejection_rate = 0.0;
  double mean_p_value = 0.0;
  double est_mean = 0.0;
  double est_sd = 0.0;
  double bias = 0.0;  // mean absolute error against the design effect of 1
};

struct TableReport {
  Command kind = Command::TestValidity;
  std::vector<TableCell> cells;
  std::uint64_t base_seed = 0;
  std::uint64_t config_hash = 0;
  double wall_seconds = 0.0;
};

// Order-independent aggregation of per-replication records.
TableReport aggregate(const std::vector<ReplicationRecord>& records);

// Runs the whole grid on a worker pool; records come back sorted by
// (setting, n, rep) regardless of scheduling.
std::vector<ReplicationRecord> run_spec(const RunSpec& spec);

void write_records_jsonl(const std::vector<ReplicationRecord>& records, std::ostream& out);

std::string render_table(const TableReport& report);

// Bounds used by --check: the desk-scale expectations for the two bundled
// study tables. Returns the failure messages, empty when everything holds.
std::vector<std::string> check_report(const TableReport& report);

std::uint64_t config_hash(const RunSpec& spec);

// Full command dispatch: runs, writes records.jsonl and table.txt under
// spec.output_dir (when set), prints the table to `log`, and returns a
// process exit code honoring spec.check.
int execute(RunSpec spec, std::ostream& log);

}  // namespace exmap
