#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/error.hpp"
#include "edgewear/sim/scenario.hpp"
#include "tcp_loopback.hpp"

namespace edgewear::cli {

namespace {

using Clock = std::chrono::steady_clock;

nlohmann::json ledger_json(const device::EnergyLedger& l) {
  nlohmann::json states = nlohmann::json::object();
  for (auto s : device::kAllDeviceStates) {
    states[std::string(device::device_state_name(s))] = {{"time_s", l.time_s[static_cast<std::size_t>(s)]},
                                                         {"consumed_mah", l.consumed_mah_in(s)}};
  }
  return {{"capacity_mah", l.capacity_mah},
          {"consumed_mah", l.consumed_total_mah()},
          {"remaining_mah", l.remaining_mah},
          {"elapsed_s", l.elapsed_s},
          {"depleted", l.depleted},
          {"states", states}};
}

void write_ledger(const Context& ctx, const std::string& stem, const device::EnergyLedger& l) {
  if (ctx.json()) {
    write_json(ctx.out(stem + ".json"), ledger_json(l));
    return;
  }
  std::ostringstream csv;
  csv << "state,time_s,consumed_mah\n";
  for (auto s : device::kAllDeviceStates) {
    csv << device::device_state_name(s) << ',' << l.time_s[static_cast<std::size_t>(s)] << ','
        << l.consumed_mah_in(s) << '\n';
  }
  csv << "total," << l.elapsed_s << ',' << l.consumed_total_mah() << '\n';
  csv << "remaining,," << l.remaining_mah << '\n';
  write_text(ctx.out(stem + ".csv"), csv.str());
}

void run_power(const Context& ctx, const sim::Scenario& s) {
  const auto p = device::simulate_power(s.system.power, s.power_schedule);
  write_ledger(ctx, "power_ledger", p.ledger);
  std::cout << "power schedule: " << p.ledger.elapsed_s << " s, " << p.ledger.consumed_total_mah() << " mAh used, "
            << "average " << p.average_current_ma << " mA, runtime to empty "
            << device::format_runtime(p.runtime_to_empty_h) << "\n";
}

int run_stream(const Context& ctx, const sim::Scenario& s) {
  std::ostringstream csv;
  csv << "seed,direction,chunks_sent,accepted,late,duplicates,underruns,concealed_chunks,first_play_ms\n";
  nlohmann::json rows = nlohmann::json::array();
  std::size_t total_underruns = 0;
  for (std::size_t i = 0; i < s.stream_seeds.size(); ++i) {
    auto sc = s.stream;
    sc.channel.seed = s.stream_seeds[i];
    const auto r = netsim::run_stream_scenario(sc);
    total_underruns += r.underruns();
    for (const auto& d : r.directions) {
      csv << sc.channel.seed << ',' << netsim::direction_name(d.direction) << ',' << d.chunks_sent << ','
          << d.jitter.accepted << ',' << d.jitter.late << ',' << d.jitter.duplicates << ',' << d.jitter.underruns << ','
          << d.jitter.concealed_chunks << ',' << d.first_play_ms << '\n';
      rows.push_back({{"seed", sc.channel.seed},
                      {"direction", netsim::direction_name(d.direction)},
                      {"chunks_sent", d.chunks_sent},
                      {"accepted", d.jitter.accepted},
                      {"late", d.jitter.late},
                      {"underruns", d.jitter.underruns},
                      {"concealed_chunks", d.jitter.concealed_chunks},
                      {"first_play_ms", d.first_play_ms}});
    }
    if (i == 0) {
      std::ofstream t(ctx.out("channel_trace.csv"));
      r.trace.write_csv(t);
    }
    std::cout << "seed " << sc.channel.seed << ": " << r.underruns() << " underruns\n";
  }
  write_text(ctx.out_table("stream_results"), ctx.json() ? rows.dump(2) + "\n" : csv.str());
  std::cout << "coexistence " << netsim::coexistence_name(s.stream.channel.coexistence) << ", prebuffer "
            << s.stream.jitter.prebuffer_ms << " ms: " << total_underruns << " underruns over "
            << s.stream_seeds.size() << " seed(s)\n";
  return 0;
}

sim::SystemResult run_session(const Context& ctx, const sim::SystemInputs& in, const sim::SystemConfig& cfg) {
  const auto log_path = ctx.out("queries.jsonl");
  fs::remove(log_path);
  edge::QueryLog log(log_path);
  netsim::TransportRegistry registry;
  return sim::run_system(cfg, in, &registry, &log);
}

void write_session_artifacts(const Context& ctx, const sim::Scenario& s, const sim::SystemResult& r,
                             double wall_s) {
  {
    std::ofstream ev(ctx.out("events.jsonl"));
    for (const auto& e : r.events) ev << e.dump() << '\n';
  }
  if (r.latency) {
    std::ostringstream t;
    if (ctx.json()) {
      t << r.latency->to_json().dump(2) << '\n';
    } else {
      r.latency->write_csv(t);
    }
    write_text(ctx.out_table("latency"), t.str());
    std::ostringstream sum;
    r.latency->write_summary(sum);
    write_text(ctx.out("latency_summary.txt"), sum.str());
  }
  write_ledger(ctx, "energy", r.energy);
  {
    std::ofstream t(ctx.out("channel_trace.csv"));
    r.runtime_trace.write_csv(t);
  }
  nlohmann::json transports = nlohmann::json::array();
  for (const auto& t : r.transports) {
    transports.push_back({{"name", t.name}, {"kind", t.kind}, {"endpoint_a", t.endpoint_a}, {"endpoint_b", t.endpoint_b}});
  }
  write_json(ctx.out("transports.json"), transports);
  if (!r.speaker.samples.empty()) audio::write_wav(r.speaker, ctx.out("speaker.wav"));

  const nlohmann::json summary = {
      {"scenario", s.name},
      {"queries", r.records.size()},
      {"wake_detections", r.device_stats.detections},
      {"audio_chunks_sent", r.device_stats.audio_chunks_sent},
      {"photos_sent", r.device_stats.photo_meta_sent},
      {"photos_stored", r.device_stats.photos_stored},
      {"response_underruns", r.device_stats.underruns},
      {"median_end_to_end_ms", r.latency ? nlohmann::json(r.latency->end_to_end.p50) : nlohmann::json(nullptr)},
      {"max_additivity_error", r.latency ? nlohmann::json(r.latency->max_additivity_error) : nlohmann::json(nullptr)},
      {"device_state", device::device_state_name(r.device_state)},
      {"device_session", wire::session_state_name(r.device_session)},
      {"edge_session", wire::session_state_name(r.edge_session)},
      {"transports", r.transports.size()},
      {"simulated_s", r.end_ms / 1000.0},
      {"wall_s", wall_s}};
  write_json(ctx.out("summary.json"), summary);

  std::cout << "scenario " << s.name << ": " << r.records.size() << " queries in " << r.end_ms / 1000.0
            << " s simulated (" << wall_s << " s wall)\n";
  for (const auto& q : r.records) {
    std::cout << "  #" << q.id << " \"" << q.transcript << "\" -> " << intent::intent_name(q.intent) << " / "
              << intent::pathway_name(q.pathway) << ": \"" << q.response_text << "\" (" << q.end_to_end_ms
              << " ms)\n";
  }
  if (r.latency) r.latency->write_summary(std::cout);
  std::cout << "device " << device::device_state_name(r.device_state) << ", session "
            << wire::session_state_name(r.device_session) << "; energy used " << r.energy.consumed_total_mah()
            << " mAh\n";
}

int simulate(const Context& ctx, const std::string& path, std::optional<uint16_t> tcp_port) {
  const auto t0 = Clock::now();
  const auto s = sim::load_scenario(path);
  if (s.kind == sim::ScenarioKind::stream) return run_stream(ctx, s);
  if (s.kind == sim::ScenarioKind::power) {
    run_power(ctx, s);
    return 0;
  }
  const auto in = sim::load_inputs(s);
  auto cfg = s.system;
  std::unique_ptr<LoopbackPipe> pipe;
  if (tcp_port) {
    pipe = std::make_unique<LoopbackPipe>(*tcp_port);
    std::cout << "runtime link carried over tcp 127.0.0.1:" << pipe->port() << "\n";
    cfg.carrier = [p = pipe.get()](const std::vector<uint8_t>& b, netsim::Direction d) { return p->carry(b, d); };
  }
  const auto r = run_session(ctx, in, cfg);
  write_session_artifacts(ctx, s, r, std::chrono::duration<double>(Clock::now() - t0).count());
  if (!s.power_schedule.empty()) run_power(ctx, s);
  return 0;
}

}  // namespace

void add_sim_commands(CLI::App& app, Context& ctx) {
  {
    auto* c = app.add_subcommand("simulate", "Run a scenario file on simulated time");
    auto scenario = std::make_shared<std::string>();
    c->add_option("scenario", *scenario, "Scenario JSON")->required();
    ctx.on(c, [&ctx, scenario] { return simulate(ctx, *scenario, std::nullopt); });
  }

  {
    auto* c = app.add_subcommand("power-report", "Battery runtime per operating state");
    auto profile = std::make_shared<std::string>();
    auto schedule = std::make_shared<std::string>();
    auto battery = std::make_shared<std::optional<double>>();
    c->add_option("--profile", *profile, "Power profile JSON");
    c->add_option("--schedule", *schedule, "Schedule JSON: [{state, duration_s}, ...]");
    c->add_option("--battery-mah", *battery, "Override battery capacity");
    ctx.on(c, [&ctx, profile, schedule, battery] {
      device::PowerProfile p;
      auto read = [](const std::string& f, const char* what) {
        require_exists(f, what);
        std::ifstream in(f);
        try {
          return nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(f + ": " + e.what());
        }
      };
      if (!profile->empty()) p = device::power_profile_from_json(read(*profile, "profile"));
      if (*battery) {
        p.battery_mah = **battery;
        p.validate();
      }
      std::vector<device::ScheduleEntry> sched;
      if (!schedule->empty()) sched = device::schedule_from_json(read(*schedule, "schedule"));
      const auto rows = device::power_report(p, sched);
      device::write_power_report_text(rows, p.battery_mah, std::cout);
      if (ctx.json()) {
        write_json(ctx.out("power_report.json"), device::power_report_json(rows, p.battery_mah));
      } else {
        std::ofstream out(ctx.out("power_report.csv"));
        device::write_power_report_csv(rows, out);
      }
      return 0;
    });
  }

  {
    auto* e = app.add_subcommand("edge", "Phone-side service");
    e->require_subcommand(1);
    auto* c = e->add_subcommand("serve", "Serve a scenario in-process, optionally over loopback TCP");
    auto scenario = std::make_shared<std::string>();
    auto port = std::make_shared<std::optional<uint16_t>>();
    c->add_option("--scenario", *scenario, "Session scenario JSON");
    c->add_option("--tcp", *port, "Carry the runtime link over 127.0.0.1:<port> (0 = any free port)");
    ctx.on(c, [&ctx, scenario, port] {
      if (scenario->empty() && !*port) throw ConfigError("edge serve: give --scenario <file> and/or --tcp <port>");
      const std::string path = scenario->empty() ? std::string("data/scenarios/walkthrough.json") : *scenario;
      return simulate(ctx, path, *port);
    });
  }

  {
    auto* d = app.add_subcommand("device", "Earpiece emulator");
    d->require_subcommand(1);
    auto* c = d->add_subcommand("run", "Run a session scenario and print the device event log");
    auto scenario = std::make_shared<std::string>();
    c->add_option("--scenario", *scenario, "Session scenario JSON")->required();
    ctx.on(c, [&ctx, scenario] {
      const auto s = sim::load_scenario(*scenario);
      if (s.kind != sim::ScenarioKind::session) throw ConfigError("device run: needs a session scenario");
      const auto in = sim::load_inputs(s);
      const auto r = run_session(ctx, in, s.system);
      std::ofstream log(ctx.out("device_events.jsonl"));
      for (const auto& e : r.events) {
        if (e["source"] != "device") continue;
        log << e.dump() << '\n';
        std::cout << e.dump() << '\n';
      }
      write_ledger(ctx, "energy", r.energy);
      std::size_t i = 0;
      for (const auto& ep : r.episodes) {
        std::cerr << "episode " << i++ << ": wake " << ep.wake_ms << " ms, " << ep.audio_chunks << " chunks up, "
                  << ep.photo_meta << " photo(s), " << ep.response_chunks << " chunks down, " << ep.underruns
                  << " underruns" << (ep.completed ? "" : " (incomplete)") << "\n";
      }
      return 0;
    });
  }
}

}  // namespace edgewear::cli
