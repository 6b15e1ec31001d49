#include "exmap/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "exmap/effects.hpp"
#include "exmap/errors.hpp"
#include "exmap/gca.hpp"
#include "exmap/nuisance.hpp"

namespace exmap {

const char* command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::TestValidity: return "test-validity";
    case Command::EstimateDirect: return "estimate-direct";
    case Command::ReproduceTable1: return "reproduce-table1";
    case Command::ReproduceTable2: return "reproduce-table2";
  }
  return "?";
}

Command command_from_name(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "test-validity") return Command::TestValidity;
  if (name == "estimate-direct") return Command::EstimateDirect;
  if (name == "reproduce-table1") return Command::ReproduceTable1;
  if (name == "reproduce-table2") return Command::ReproduceTable2;
  throw std::invalid_argument("unknown command: " + name);
}

void RunSpec::resolve_defaults() {
  if (settings.empty()) {
    switch (command) {
      case Command::ReproduceTable1:
        settings = {Setting::S1, Setting::S2, Setting::S3};
        break;
      case Command::ReproduceTable2:
      case Command::EstimateDirect:
        settings = {Setting::Direct};
        break;
      default:
        settings = {Setting::S1};
        break;
    }
  }
  if (n_list.empty()) {
    switch (command) {
      case Command::ReproduceTable1:
        n_list = {500, 1000, 2000};
        break;
      case Command::ReproduceTable2:
        n_list = {100, 200, 500, 1000};
        break;
      default:
        n_list = {500};
        break;
    }
  }
  if (replications < 1) throw std::invalid_argument("RunSpec: replications must be >= 1");
  if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (folds <= 0) folds = 5;
}

namespace {

double radius_for(const RunSpec& spec, Setting setting) {
  if (spec.radius_constant > 0.0) return spec.radius_constant;
  return setting == Setting::Direct ? 5.0 : 30.0;
}

ExposureKind researcher_kind_for(Setting setting) {
  // The binary any-treated mapping is the misspecified choice of the second
  // regime; the share mapping is used elsewhere.
  return setting == Setting::S2 ? ExposureKind::BinaryAnyTreated : ExposureKind::RatioShare;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

ReplicationRecord run_replication(const RunSpec& spec, Setting setting, int n, int rep) {
  ReplicationRecord rec;
  rec.kind = spec.command == Command::ReproduceTable1   ? Command::TestValidity
             : spec.command == Command::ReproduceTable2 ? Command::EstimateDirect
                                                        : spec.command;
  rec.setting = setting;
  rec.n = n;
  rec.rep = rep;
  rec.seed = derive_seed(spec.base_seed, setting_name(setting), static_cast<std::uint64_t>(n),
                         static_cast<std::uint64_t>(rep));

  SimConfig cfg;
  cfg.n = n;
  cfg.setting = setting;
  cfg.radius_constant = radius_for(spec, setting);
  cfg.direct_threshold = spec.direct_threshold;
  cfg.seed = derive_seed(rec.seed, "data", 0, 0);

  const Dataset data = draw_population(cfg);

  GcaConfig gca_cfg;
  gca_cfg.hidden_dims = {spec.hidden_width};
  gca_cfg.learning_rate = spec.learning_rate;
  gca_cfg.epochs = spec.epochs;
  gca_cfg.seed = derive_seed(rec.seed, "gca", 0, 0);

  if (rec.kind == Command::Simulate) return rec;

  Rng fold_rng(derive_seed(rec.seed, "folds", 0, 0));
  const FoldScheme folds = make_folds(n, std::min(spec.folds, n), fold_rng);

  if (rec.kind == Command::TestValidity) {
    const ExposureVector zdot =
        researcher_exposure(researcher_kind_for(setting), data.graph, data.d, data.x);

    // Cross-fitted representation: each fold is labeled by a model whose
    // loss never saw that fold's outcomes, so the learned cells carry no
    // in-sample noise alignment. Embeddings are oriented by the decoder
    // sign and partitioned within the fold.
    Partition labels;
    labels.cell_count = spec.L;
    labels.labels.assign(n, 0);
    std::vector<double> stitched(n, 0.0);
    try {
      for (int k = 0; k < folds.k_folds; ++k) {
        std::vector<int> mask(n, 0);
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
          if (folds.assignment[i] == k)
            members.push_back(i);
          else
            mask[i] = 1;
        }
        GcaConfig fold_cfg = gca_cfg;
        fold_cfg.seed = derive_seed(rec.seed, "gca", static_cast<std::uint64_t>(k), 0);
        const GcaTraining trained =
            train_gca(data.graph, data.d, data.x, data.y, fold_cfg, &mask);
        const ExposureVector embed =
            learned_exposure(trained.model, data.graph, data.d, data.x);
        const double orient = trained.model.decoder_weight < 0.0 ? -1.0 : 1.0;

        ExposureVector fold_values;
        fold_values.kind = ExposureKind::Learned;
        for (int i : members) fold_values.values.push_back(orient * embed.values[i]);
        const Partition fold_cells = quantile_partition(fold_values, spec.L);
        if (fold_cells.cell_count < spec.L)
          throw degenerate_partition_error("fold embedding collapsed below L cells");
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
          labels.labels[members[pos]] = fold_cells.labels[pos];
          stitched[members[pos]] = fold_values.values[pos];
        }
      }
    } catch (const training_divergence_error& e) {
      rec.flagged = true;
      rec.flag_reason = e.what();
      return rec;
    } catch (const degenerate_partition_error& e) {
      rec.flagged = true;
      rec.flag_reason = e.what();
      return rec;
    }
    rec.corr_learned_true = pearson(stitched, data.z_true);

    const TestResult result = dml_test_with_partition(data.y, zdot, labels, folds);
    if (result.inconclusive) {
      rec.flagged = true;
      rec.flag_reason = result.note.empty() ? "inconclusive" : result.note;
      return rec;
    }
    rec.theta_hat = result.theta_hat;
    rec.std_error = result.std_error;
    rec.z_stat = result.z_stat;
    rec.p_value = result.p_value;
    rec.reject = result.reject_at_05;
    rec.effective_L = result.effective_L;
    return rec;
  }

  ExposureVector ztilde;
  try {
    const GcaTraining trained = train_gca(data.graph, data.d, data.x, data.y, gca_cfg);
    ztilde = learned_exposure(trained.model, data.graph, data.d, data.x);
    rec.corr_learned_true = pearson(ztilde.values, data.z_true);
  } catch (const training_divergence_error& e) {
    rec.flagged = true;
    rec.flag_reason = e.what();
    return rec;
  }

  // Direct-effect protocol: plain IPW over the two threshold-exposure
  // levels, logistic treatment propensity, exact exposure propensity from
  // the generating design.
  const std::vector<double> treat_prob = fit_treatment_propensity(data.d, data.x, folds);
  std::vector<double> expo1 =
      oracle_exposure_propensity(data.graph, data.x, spec.direct_threshold);
  for (double& v : expo1) v = trim_probability(v);

  std::vector<int> z_obs(n);
  for (int i = 0; i < n; ++i) z_obs[i] = data.z_true[i] > 0.5 ? 1 : 0;

  const auto propensity_for = [&](int d, int z) {
    std::vector<double> expo(expo1.size());
    for (std::size_t i = 0; i < expo.size(); ++i) expo[i] = z == 1 ? expo1[i] : 1.0 - expo1[i];
    return joint_propensity(d, treat_prob, expo);
  };

  try {
    const DirectAverageResult avg =
        direct_effect_avg(data.y, data.d, z_obs, {0, 1}, propensity_for);
    rec.gamma_hat = avg.estimate.estimate;
    rec.gamma_se = avg.estimate.std_error;
    if (avg.flagged) {
      rec.flagged = true;
      rec.flag_reason = "dropped exposure cell";
    }
  } catch (const empty_cell_error& e) {
    rec.flagged = true;
    rec.flag_reason = e.what();
  }
  return rec;
}

TableReport aggregate(const std::vector<ReplicationRecord>& records) {
  TableReport report;
  if (records.empty()) return report;
  report.kind = records.front().kind;

  std::vector<std::pair<Setting, int>> keys;
  for (const auto& r : records) {
    const std::pair<Setting, int> key{r.setting, r.n};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return static_cast<int>(a.first) < static_cast<int>(b.first);
    return a.second < b.second;
  });

  for (const auto& [setting, n] : keys) {
    TableCell cell;
    cell.setting = setting;
    cell.n = n;
    std::vector<double> estimates;
    int rejects = 0;
    double psum = 0.0;
    for (const auto& r : records) {
      if (r.setting != setting || r.n != n) continue;
      ++cell.reps_total;
      if (r.flagged) {
        ++cell.reps_flagged;
        continue;
      }
      if (r.kind == Command::TestValidity) {
        rejects += r.reject ? 1 : 0;
        psum += r.p_value;
      } else if (r.kind == Command::EstimateDirect) {
        estimates.push_back(r.gamma_hat);
      }
    }
    const int used = cell.reps_total - cell.reps_flagged;
    if (used > 0) {
      cell.rejection_rate = static_cast<double>(rejects) / used;
      cell.mean_p_value = psum / used;
      if (!estimates.empty()) {
        double mean = 0.0, bias = 0.0;
        for (double v : estimates) {
          mean += v;
          bias += std::abs(v - 1.0);
        }
        mean /= estimates.size();
        bias /= estimates.size();
        double var = 0.0;
        for (double v : estimates) var += (v - mean) * (v - mean);
        cell.est_mean = mean;
        cell.est_sd = estimates.size() > 1 ? std::sqrt(var / (estimates.size() - 1)) : 0.0;
        cell.bias = bias;
      }
    }
    report.cells.push_back(cell);
  }
  return report;
}

std::vector<ReplicationRecord> run_spec(const RunSpec& spec) {
  struct Task {
    Setting setting;
    int n;
    int rep;
  };
  std::vector<Task> tasks;
  for (Setting s : spec.settings)
    for (int n : spec.n_list)
      for (int rep = 0; rep < spec.replications; ++rep) tasks.push_back({s, n, rep});

  std::vector<ReplicationRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) break;
      const Task& t = tasks[idx];
      records[idx] = run_replication(spec, t.setting, t.n, t.rep);
    }
  };

  const int thread_count = std::max(1, std::min<int>(spec.workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (int w = 0; w < thread_count; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return records;
}

void write_records_jsonl(const std::vector<ReplicationRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["kind"] = command_name(r.kind);
    j["setting"] = setting_name(r.setting);
    j["n"] = r.n;
    j["rep"] = r.rep;
    j["seed"] = r.seed;
    j["flagged"] = r.flagged;
    if (r.flagged) j["flag_reason"] = r.flag_reason;
    if (r.kind == Command::TestValidity && !r.flagged) {
      j["theta_hat"] = r.theta_hat;
      j["std_error"] = r.std_error;
      j["z_stat"] = r.z_stat;
      j["p_value"] = r.p_value;
      j["reject"] = r.reject;
      j["effective_L"] = r.effective_L;
    }
    if (r.kind == Command::EstimateDirect && !r.flagged) {
      j["gamma_hat"] = r.gamma_hat;
      j["gamma_se"] = r.gamma_se;
    }
    if (r.kind != Command::Simulate) j["corr_learned_true"] = r.corr_learned_true;
    out << j.dump() << '\n';
  }
}

std::string render_table(const TableReport& report) {
  std::string out;
  char buf[160];
  if (report.kind == Command::TestValidity) {
    out += "setting      n   rejection rate   mean p-value   reps  flagged\n";
    for (const auto& c : report.cells) {
      std::snprintf(buf, sizeof(buf), "%-7s %6d   %14.3f   %12.3f   %4d  %7d\n",
                    setting_name(c.setting), c.n, c.rejection_rate, c.mean_p_value,
                    c.reps_total, c.reps_flagged);
      out += buf;
    }
  } else if (report.kind == Command::EstimateDirect) {
    out += "setting      n      est      std     bias   reps  flagged\n";
    for (const auto& c : report.cells) {
      std::snprintf(buf, sizeof(buf), "%-7s %6d   %6.3f   %6.3f   %6.3f   %4d  %7d\n",
                    setting_name(c.setting), c.n, c.est_mean, c.est_sd, c.bias, c.reps_total,
                    c.reps_flagged);
      out += buf;
    }
  } else {
    out += "(no table for this command)\n";
  }
  std::snprintf(buf, sizeof(buf), "base_seed=%llu config=%016llx wall=%.1fs\n",
                static_cast<unsigned long long>(report.base_seed),
                static_cast<unsigned long long>(report.config_hash), report.wall_seconds);
  out += buf;
  return out;
}

std::vector<std::string> check_report(const TableReport& report) {
  std::vector<std::string> failures;
  char buf[200];
  auto fail = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    failures.emplace_back(buf);
  };

  for (const auto& c : report.cells) {
    const double flag_rate =
        c.reps_total > 0 ? static_cast<double>(c.reps_flagged) / c.reps_total : 0.0;
    if (flag_rate >= 0.05)
      fail("%s n=%d: flagged fraction %.3f >= 0.05", setting_name(c.setting), c.n, flag_rate);
  }

  if (report.kind == Command::TestValidity) {
    double last_s2 = -1.0;
    for (const auto& c : report.cells) {
      switch (c.setting) {
        case Setting::S1:
          if (c.rejection_rate > 0.07)
            fail("S1 n=%d: rejection rate %.3f > 0.07", c.n, c.rejection_rate);
          if (c.mean_p_value < 0.5)
            fail("S1 n=%d: mean p-value %.3f < 0.5", c.n, c.mean_p_value);
          break;
        case Setting::S2: {
          if (c.rejection_rate < last_s2 - 1e-12)
            fail("S2 n=%d: rejection rate %.3f decreased", c.n, c.rejection_rate);
          last_s2 = c.rejection_rate;
          const double expected = c.n <= 500 ? 0.32 : c.n <= 1000 ? 0.625 : 0.895;
          if (std::abs(c.rejection_rate - expected) > 0.15)
            fail("S2 n=%d: rejection rate %.3f not within 0.15 of %.3f", c.n, c.rejection_rate,
                 expected);
          if (c.n >= 2000 && c.rejection_rate < 0.75)
            fail("S2 n=%d: rejection rate %.3f < 0.75", c.n, c.rejection_rate);
          break;
        }
        case Setting::S3:
          if (c.rejection_rate < 0.65)
            fail("S3 n=%d: rejection rate %.3f < 0.65", c.n, c.rejection_rate);
          break;
        default:
          break;
      }
    }
  } else if (report.kind == Command::EstimateDirect) {
    double last_bias = -1.0;
    bool bias_monotone = true;
    for (const auto& c : report.cells) {
      if (last_bias >= 0.0 && c.bias > last_bias + 1e-12) bias_monotone = false;
      last_bias = c.bias;
      if (c.n == 1000) {
        if (c.est_mean < 0.85 || c.est_mean > 1.15)
          fail("DIRECT n=1000: mean estimate %.3f outside [0.85, 1.15]", c.est_mean);
        if (c.est_sd < 0.2 || c.est_sd > 0.45)
          fail("DIRECT n=1000: sd %.3f outside [0.2, 0.45]", c.est_sd);
      }
    }
    if (!bias_monotone) failures.emplace_back("DIRECT: bias not decreasing over the n grid");
  }
  return failures;
}

std::uint64_t config_hash(const RunSpec& spec) {
  std::string s = command_name(spec.command);
  for (Setting st : spec.settings) s += std::string(",") + setting_name(st);
  for (int n : spec.n_list) s += "," + std::to_string(n);
  s += ";R=" + std::to_string(spec.replications);
  s += ";seed=" + std::to_string(spec.base_seed);
  s += ";L=" + std::to_string(spec.L);
  s += ";folds=" + std::to_string(spec.folds);
  s += ";hw=" + std::to_string(spec.hidden_width);
  s += ";lr=" + std::to_string(spec.learning_rate);
  s += ";ep=" + std::to_string(spec.epochs);
  s += ";rc=" + std::to_string(spec.radius_constant);
  s += ";thr=" + std::to_string(spec.direct_threshold);

  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int execute(RunSpec spec, std::ostream& log) {
  spec.resolve_defaults();
  const auto start = std::chrono::steady_clock::now();

  namespace fs = std::filesystem;
  if (!spec.output_dir.empty()) fs::create_directories(spec.output_dir);

  if (spec.command == Command::Simulate) {
    for (Setting s : spec.settings) {
      for (int n : spec.n_list) {
        for (int rep = 0; rep < spec.replications; ++rep) {
          SimConfig cfg;
          cfg.n = n;
          cfg.setting = s;
          cfg.radius_constant = spec.radius_constant > 0.0 ? spec.radius_constant
                                : s == Setting::Direct     ? 5.0
                                                           : 30.0;
          cfg.direct_threshold = spec.direct_threshold;
          cfg.seed = derive_seed(derive_seed(spec.base_seed, setting_name(s), n, rep), "data", 0, 0);
          const Dataset data = draw_population(cfg);
          if (!spec.output_dir.empty()) {
            const std::string stem = std::string(setting_name(s)) + "_n" + std::to_string(n) +
                                     "_rep" + std::to_string(rep);
            std::ofstream tsv(fs::path(spec.output_dir) / (stem + ".tsv"));
            save_dataset_tsv(data, tsv);
            std::ofstream edges(fs::path(spec.output_dir) / (stem + ".edges"));
            save_edge_list(data.graph, edges);
          } else {
            save_dataset_tsv(data, log);
          }
        }
      }
    }
    log << "simulated " << spec.settings.size() * spec.n_list.size() * spec.replications
        << " dataset(s)\n";
    return 0;
  }

  const std::vector<ReplicationRecord> records = run_spec(spec);
  TableReport report = aggregate(records);
  report.base_seed = spec.base_seed;
  report.config_hash = config_hash(spec);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string table = render_table(report);
  log << table;

  if (!spec.output_dir.empty()) {
    std::ofstream rec_out(fs::path(spec.output_dir) / "records.jsonl");
    write_records_jsonl(records, rec_out);
    std::ofstream table_out(fs::path(spec.output_dir) / "table.txt");
    table_out << table;
  }

  for (const auto& c : report.cells) {
    if (c.reps_total > 0 && static_cast<double>(c.reps_flagged) / c.reps_total >= 0.05) {
      log << "error: flagged-replication fraction >= 5% in " << setting_name(c.setting)
          << " n=" << c.n << "\n";
      return 2;
    }
  }

  if (spec.check) {
    const std::vector<std::string> failures = check_report(report);
    for (const auto& f : failures) log << "check failed: " << f << "\n";
    if (!failures.empty()) return 1;
    log << "check passed\n";
  }
  return 0;
}

}  // namespace exmap
