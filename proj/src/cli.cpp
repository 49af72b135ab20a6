#include "robofruit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "robofruit/config.hpp"
#include "robofruit/error.hpp"
#include "robofruit/metrics.hpp"
#include "robofruit/orchestrator.hpp"
#include "robofruit/scene.hpp"

namespace robofruit::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidConfig, "bad seed '" + std::string(s) + "'");
  }
  return v;
}

/// Usage-level problem detected after parsing (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("output directory not writable: " + dir);
}

std::string report_extension(metrics::ReportFormat f) {
  switch (f) {
    case metrics::ReportFormat::Json: return "json";
    case metrics::ReportFormat::Csv: return "csv";
    case metrics::ReportFormat::Text: return "txt";
  }
  return "txt";
}

config::SimConfig load_sim_config(const std::string& path, const std::string& profile) {
  if (path.empty()) return config::profile_defaults(profile.empty() ? "default" : profile);
  config::SimConfig c = config::load_config(path);
  if (!profile.empty() && profile != c.profile) {
    throw UsageError("--profile conflicts with the profile in " + path);
  }
  return c;
}

std::vector<orchestrator::TrialLog> run_seeds(const config::SimConfig& c,
                                              const std::vector<std::uint64_t>& seeds) {
  std::vector<orchestrator::TrialLog> logs(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        const auto world = scene::generate_scene(c.scene, seeds[i]);
        logs[i] = orchestrator::run_trial(world, c.trial, seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(worker_count(), seeds.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return logs;  // already in seed order: seeds are sorted
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

// CSV is left alone so its column count stays fixed.
std::string add_timestamp(const std::string& report, metrics::ReportFormat f,
                          const std::string& stamp) {
  switch (f) {
    case metrics::ReportFormat::Json: {
      auto j = config::json::parse(report);
      j["generated_at"] = stamp;
      return j.dump(2) + "\n";
    }
    case metrics::ReportFormat::Text: return report + "generated at " + stamp + "\n";
    case metrics::ReportFormat::Csv: return report;
  }
  return report;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& specs) {
  std::vector<std::uint64_t> seeds;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(parse_u64(item));
        continue;
      }
      const auto lo = parse_u64(std::string_view(item).substr(0, dash));
      const auto hi = parse_u64(std::string_view(item).substr(dash + 1));
      if (hi < lo || hi - lo >= 1000000) {
        throw Error(ErrorKind::InvalidConfig, "bad seed range '" + item + "'");
      }
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.empty()) throw Error(ErrorKind::InvalidConfig, "no seeds given");
  return seeds;
}

unsigned worker_count() {
  if (const char* env = std::getenv("ROBOFRUIT_SIM_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Strawberry harvesting simulator"};
  app.require_subcommand(0, 1);
  bool print_default = false;
  app.add_flag("--print-default-config", print_default,
               "Print the full default configuration and exit");

  std::string config_path;
  std::string profile;
  std::string out_path;
  std::uint64_t seed = 1;
  std::vector<std::string> seed_specs;
  std::vector<std::string> formats{"text"};
  std::string policy;
  bool verbose = false;
  bool timestamps = false;
  std::string gpr_path;
  std::size_t teach_count = 200;
  std::string fixture = std::string(ROBOFRUIT_DATA_DIR) + "/field_trials.csv";

  auto* gen = app.add_subcommand("generate", "Generate a scene and write it as JSON");
  gen->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  gen->add_option("--profile", profile, "Base profile: default, golden or calibrated");
  gen->add_option("--seed", seed, "Scene seed");
  gen->add_option("--out", out_path, "Output file (stdout when omitted)");

  auto* run = app.add_subcommand("run", "Run one trial per seed and report metrics");
  run->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  run->add_option("--profile", profile, "Base profile: default, golden or calibrated");
  auto* seed_opt = run->add_option("--seed", seed, "Single seed");
  run->add_option("--seeds", seed_specs, "Seeds: N, A-B or comma lists")->excludes(seed_opt);
  run->add_option("--out", out_path, "Output directory for logs and reports");
  run->add_option("--format", formats, "Report formats")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  run->add_option("--policy", policy, "Scheduling policy")
      ->check(CLI::IsMember({"coordinate", "minmax"}));
  run->add_flag("--verbose", verbose, "Record per-step events in the trial logs");
  run->add_flag("--timestamps", timestamps, "Stamp JSON and text reports with the UTC time");
  run->add_option("--gpr-model", gpr_path, "GPR model (JSON) or training set (CSV)");

  auto* teach = app.add_subcommand("teach", "Collect teaching samples and save a GPR model");
  teach->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  teach->add_option("--profile", profile, "Base profile: default, golden or calibrated");
  teach->add_option("--seed", seed, "First scene seed");
  teach->add_option("--samples", teach_count, "Number of samples")->check(CLI::PositiveNumber);
  teach->add_option("--out", out_path, "Model file (.json) or training set (.csv)")->required();

  auto* replay = app.add_subcommand("replay", "Replay the recorded field-trial table");
  replay->add_option("fixture", fixture, "Field-trial CSV");
  replay->add_option("--format", formats, "Report formats")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  replay->add_flag("--timestamps", timestamps, "Stamp JSON and text reports with the UTC time");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (print_default) {
    out << config::default_config_text();
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kUsage;
  }

  const std::string stamp = timestamps ? utc_now() : std::string();
  auto report = [&](const metrics::HarvestMetrics& m, metrics::ReportFormat f) {
    const std::string text = metrics::emit_report(m, f);
    return stamp.empty() ? text : add_timestamp(text, f, stamp);
  };

  try {
    if (gen->parsed()) {
      const auto c = load_sim_config(config_path, profile);
      const auto world = scene::generate_scene(c.scene, seed);
      const std::string text = config::scene_to_json(world).dump(2) + "\n";
      if (out_path.empty()) {
        out << text;
      } else {
        write_text(out_path, text);
      }
      return kOk;
    }

    if (teach->parsed()) {
      auto c = load_sim_config(config_path, profile);
      const auto samples =
          orchestrator::collect_teach_samples(c.trial, c.scene, teach_count, seed);
      if (out_path.ends_with(".csv")) {
        std::ostringstream ss;
        gpr::save_training_csv(samples, ss);
        write_text(out_path, ss.str());
      } else {
        const auto model = gpr::GprModel::fit(samples, c.trial.gpr_options);
        write_text(out_path, config::gpr_model_to_json(model, c.trial.gpr_layout).dump(2) + "\n");
      }
      err << fmt::format("wrote {} teaching samples to {}\n", samples.size(), out_path);
      return kOk;
    }

    if (replay->parsed()) {
      metrics::HarvestMetrics m;
      try {
        m = metrics::replay_field_table(fixture);
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
      }
      for (const auto& f : formats) {
        out << report(m, metrics::report_format_from_string(f));
      }
      return kOk;
    }

    // run
    auto c = load_sim_config(config_path, profile);
    if (!policy.empty()) c.trial.policy = scheduler::policy_from_string(policy);
    if (verbose) c.trial.verbose = true;
    if (!gpr_path.empty()) c.gpr.model_path = gpr_path;
    const auto seeds =
        seed_specs.empty() ? std::vector<std::uint64_t>{seed} : parse_seed_list(seed_specs);
    if (!out_path.empty()) prepare_out_dir(out_path);
    config::attach_gpr_model(c);
    c.trial.validate();

    const auto logs = run_seeds(c, seeds);
    const auto m = metrics::compute_metrics(logs);
    if (!out_path.empty()) {
      const fs::path dir(out_path);
      std::string lines;
      for (const auto& log : logs) lines += config::trial_log_to_json(log).dump() + "\n";
      write_text(dir / "trial_logs.jsonl", lines);
      write_text(dir / "attempts.csv", config::attempts_csv(logs));
      for (const auto& f : formats) {
        const auto fmt_kind = metrics::report_format_from_string(f);
        write_text(dir / ("report." + report_extension(fmt_kind)),
                   report(m, fmt_kind));
      }
    }
    for (const auto& f : formats) {
      out << report(m, metrics::report_format_from_string(f));
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace robofruit::cli
