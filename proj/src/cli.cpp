#include "sdwn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <memory>
#include <thread>

#include "sdwn/runtime.hpp"

namespace sdwn {

using namespace std::chrono_literals;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

constexpr int kOk = 0;
constexpr int kInvariantFailed = 1;
constexpr int kUsage = 2;

int print_report(const ReplayReport& report, std::ostream& out, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  for (const auto& v : report.violations) err << "violation: " << v << '\n';
  if (!report.ok()) {
    out << "FAIL";
    for (const auto& name : report.violated()) out << ' ' << name;
    out << '\n';
    return kInvariantFailed;
  }
  out << "PASS events=" << report.events << " iterations=" << report.iterations
      << " handoffs=" << report.handoffs << '\n';
  return kOk;
}

struct RunFlags {
  std::string scenario;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::string api_addr;
  std::string log;
  std::string transport = "local";
  std::string pace;
};

int run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  Scenario scenario = load_scenario(flags.scenario);
  if (flags.seed) scenario.radio.seed = *flags.seed;

  RuntimeOptions options;
  options.transport = transport_from_string(flags.transport);
  std::string api_addr = flags.api_addr;
  if (api_addr.empty()) {
    if (const char* env = std::getenv("SDWN_API_ADDR")) api_addr = env;
  }
  if (!api_addr.empty()) options.api = parse_listen_address(api_addr);

  const bool until_interrupted = !flags.duration;
  const Pacing pacing = !flags.pace.empty() ? pacing_from_string(flags.pace)
                        : until_interrupted ? Pacing::kRealtime
                                            : Pacing::kVirtual;
  options.realtime_scans = pacing == Pacing::kRealtime;

  std::unique_ptr<EventLog> log =
      flags.log.empty() ? std::make_unique<EventLog>() : std::make_unique<EventLog>(flags.log);
  if (flags.log.empty()) log->set_keep_in_memory(true);
  options.log = log.get();

  std::size_t iterations = 0;
  std::size_t handoffs = 0;
  {
    Runtime runtime(std::move(scenario), options);
    runtime.start();
    if (runtime.api_port()) {
      out << "api listening on " << options.api->host << ':' << *runtime.api_port() << std::endl;
    }
    auto count = [&](const std::vector<IterationSummary>& done) {
      iterations += done.size();
      for (const auto& s : done) handoffs += s.handoffs + s.manual_handoffs;
    };
    if (until_interrupted) {
      g_interrupted.store(false);
      auto previous_int = std::signal(SIGINT, on_interrupt);
      auto previous_term = std::signal(SIGTERM, on_interrupt);
      using Clock = std::chrono::steady_clock;
      const auto wall_origin = Clock::now();
      const double t_origin = runtime.now();
      while (!g_interrupted.load()) {
        if (pacing == Pacing::kRealtime) {
          const auto due = wall_origin + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(runtime.now() - t_origin));
          // Short naps so a signal is noticed promptly.
          while (!g_interrupted.load() && Clock::now() < due) {
            std::this_thread::sleep_for(std::min<Clock::duration>(due - Clock::now(), 50ms));
          }
          if (g_interrupted.load()) break;
        }
        count({runtime.step()});
      }
      std::signal(SIGINT, previous_int);
      std::signal(SIGTERM, previous_term);
    } else {
      count(runtime.run_for(*flags.duration, pacing));
    }
    runtime.shutdown();
  }
  log->flush();
  out << "ran " << iterations << " iterations, " << handoffs << " handoffs\n";

  const auto report = flags.log.empty() ? replay_check(log->events()) : replay_check_file(flags.log);
  return print_report(report, out, err);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Software-defined WLAN controller with simulated access points", "sdwnctl"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario headless or until interrupted");
  run_cmd->add_option("--scenario", flags.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--duration", flags.duration, "Simulated seconds to run")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--seed", flags.seed, "Override the scenario seed");
  run_cmd->add_option("--api-addr", flags.api_addr,
                      "Serve the management API on host:port (also SDWN_API_ADDR)");
  run_cmd->add_option("--log", flags.log, "Write the NDJSON event log here");
  run_cmd->add_option("--transport", flags.transport, "local or tcp")
      ->check(CLI::IsMember({"local", "tcp"}));
  run_cmd->add_option("--pace", flags.pace, "virtual or realtime")
      ->check(CLI::IsMember({"virtual", "realtime"}));

  std::string log_path;
  auto* replay_cmd = app.add_subcommand("replay-check", "Re-check invariants over an event log");
  replay_cmd->add_option("log", log_path, "NDJSON event log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return run(flags, out, err);
    return print_report(replay_check_file(log_path), out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace sdwn
