// reservesim: run scenario files, print balance-sheet tables, write series.

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "reservesim/scenario_io.hpp"

namespace rs = reservesim;

namespace {

enum Exit : int { kOk = 0, kParse = 2, kInvariant = 3, kBreach = 4, kOperation = 5 };

struct Options {
  std::vector<std::string> scenarios;
  bool table = false;
  std::string csv;
  std::string json;
  bool strict = false;
  std::optional<int> cycles;
  std::vector<std::string> params;
  std::string ingest;
  std::vector<std::string> ratio;
  unsigned jobs = 1;
};

struct Job {
  std::string path;
  rs::ScenarioFile file;
  std::string out; // buffered stdout
  std::string err;
  int status = kOk;
};

// "out.csv" for one scenario; "out.<stem>.csv" when several share the flag.
std::filesystem::path per_scenario(const std::string& base, const std::string& scenario, bool many) {
  std::filesystem::path p(base);
  if (!many || base == "-") return p;
  auto stem = std::filesystem::path(scenario).stem().string();
  return p.parent_path() / (p.stem().string() + "." + stem + p.extension().string());
}

void emit(Job& job, rs::OutputFormat format, const std::filesystem::path& path, const rs::RunResult& run) {
  std::ostringstream os;
  switch (format) {
  case rs::OutputFormat::Csv: rs::write_series_csv(os, run.series); break;
  case rs::OutputFormat::Json: rs::write_run_json(os, run); break;
  case rs::OutputFormat::Table: rs::write_tables(os, run.series); break;
  }
  if (path == "-") {
    job.out += os.str();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << os.str();
}

void run_job(Job& job, const Options& opt, bool many) {
  try {
    rs::RunResult run = rs::run_script(job.file.script);

    std::vector<rs::OutputSpec> outputs = job.file.outputs;
    if (opt.table) outputs.push_back({rs::OutputFormat::Table, "-"});
    if (!opt.csv.empty()) outputs.push_back({rs::OutputFormat::Csv, per_scenario(opt.csv, job.path, many)});
    if (!opt.json.empty()) outputs.push_back({rs::OutputFormat::Json, per_scenario(opt.json, job.path, many)});
    if (outputs.empty()) outputs.push_back({rs::OutputFormat::Table, "-"});
    for (const auto& o : outputs) emit(job, o.format, o.path, run);

    for (const auto& b : run.breaches) {
      job.err += (b.breach.overridden ? "overridden breach" : "refused") + std::string(" at step ") +
                 std::to_string(b.step) + ": bank " + b.breach.bank + " requested " + b.breach.requested.to_string() +
                 ", headroom " + b.breach.headroom.to_string() + "\n";
    }
    if (run.series.failure) job.err += "run failed: " + *run.series.failure + "\n";

    if (run.status == rs::RunStatus::InvariantViolation) {
      job.status = kInvariant;
    } else if (run.status == rs::RunStatus::OperationError) {
      job.status = kOperation;
    } else if (opt.strict && run.refused_breach()) {
      job.status = kBreach;
    }
  } catch (const std::exception& e) {
    job.err += std::string("error: ") + e.what() + "\n";
    job.status = kOperation;
  }
}

int run_ingest(const Options& opt) {
  if (opt.ratio.size() != 2) {
    std::cerr << "error: --ingest needs --ratio <labelA> <labelB>\n";
    return kParse;
  }
  std::ifstream in(opt.ingest, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << opt.ingest << "'\n";
    return kParse;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto series = rs::read_external_csv(ss.str(), opt.ratio);
    auto ratio = rs::ratio_report(series.at(opt.ratio[0]), series.at(opt.ratio[1]));
    if (opt.csv.empty() || opt.csv == "-") {
      rs::write_external_csv(std::cout, ratio);
    } else {
      std::ofstream out(opt.csv, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + opt.csv + "'");
      rs::write_external_csv(out, ratio);
    }
  } catch (const rs::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOperation;
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Bank balance-sheet simulator: reserve lending, securitization, capital rules."};
  app.add_option("--scenario", opt.scenarios, "Scenario file (repeatable)");
  app.add_flag("--table", opt.table, "Print balance-sheet tables to stdout");
  app.add_option("--csv", opt.csv, "Write the metrics series as CSV ('-' for stdout)");
  app.add_option("--json", opt.json, "Write the full run as JSON ('-' for stdout)");
  app.add_flag("--strict", opt.strict, "Exit 4 when a loan is refused for breaching regulation");
  app.add_option("--cycles", opt.cycles, "Override the generator's cycle or round count")->check(CLI::NonNegativeNumber);
  app.add_option("--params", opt.params, "Regulatory overrides, name=value")->expected(1, -1);
  app.add_option("--ingest", opt.ingest, "External wide CSV of statistical series");
  app.add_option("--ratio", opt.ratio, "Series labels A B for the ratio A/B")->expected(2);
  app.add_option("--jobs", opt.jobs, "Scenarios to run concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  if (!opt.ingest.empty()) {
    if (!opt.scenarios.empty()) {
      std::cerr << "error: --ingest and --scenario are separate modes\n";
      return kParse;
    }
    return run_ingest(opt);
  }
  if (!opt.ratio.empty()) {
    std::cerr << "error: --ratio needs --ingest\n";
    return kParse;
  }
  if (opt.scenarios.empty()) {
    std::cerr << "error: no --scenario given\n" << app.help();
    return kParse;
  }

  std::vector<Job> jobs(opt.scenarios.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& job = jobs[i];
    job.path = opt.scenarios[i];
    try {
      job.file = rs::load_scenario(job.path);
      for (const auto& p : opt.params) rs::apply_param_override(job.file.script.params, p);
      if (opt.cycles) {
        if (!job.file.script.generator) throw rs::ParseError(job.path + ": --cycles needs a generator in the scenario");
        job.file.script.generator->count = *opt.cycles;
      }
    } catch (const rs::ParseError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kParse;
    }
  }

  const bool many = jobs.size() > 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) run_job(jobs[i], opt, many);
  };
  const unsigned n = std::min<unsigned>(opt.jobs, static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = kOk;
  for (const auto& job : jobs) {
    if (many && !job.out.empty()) std::cout << "== " << job.path << " ==\n";
    std::cout << job.out;
    std::cerr << job.err;
    if (status == kOk) status = job.status;
  }
  return status;
}
