#include "finsler/report.hpp"

#include <fftw3.h>
#include <sys/utsname.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

#include "finsler/errors.hpp"
#include "json.hpp"

namespace finsler::report {

using Json = nlohmann::ordered_json;

Environment fingerprint() {
  Environment env;
#if defined(__clang__)
  env.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  env.compiler = "gcc " __VERSION__;
#else
  env.compiler = "unknown";
#endif
#ifdef NDEBUG
  env.build_type = "release";
#else
  env.build_type = "debug";
#endif
  utsname u{};
  if (uname(&u) == 0) env.system = std::string(u.sysname) + " " + u.release + " " + u.machine;
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) == 0) env.hostname = host;
  env.fftw = fftw_version;
  env.library_version = "0.1.0";
  env.workers = 1;
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  env.timestamp = buf;
  return env;
}

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? Json("nan") : Json(v > 0 ? "inf" : "-inf");
}

Json to_json(const ScenarioReport& r) {
  Json j;
  j["name"] = r.name;
  j["source"] = r.source;
  j["status"] = r.status;
  j["wall_seconds"] = number(r.wall_seconds);
  j["steps"] = r.steps;
  j["dt"] = number(r.dt);
  j["final_time"] = number(r.final_time);
  j["gauge"] = r.gauge;
  j["scheme"] = r.scheme;
  j["grid"] = r.grid;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["verdict"] = c.verdict;
    cj["value"] = number(c.value);
    cj["tolerance"] = c.tolerance ? number(*c.tolerance) : Json(nullptr);
    cj["comparison"] = c.comparison;
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  if (r.blowup) {
    j["blowup"] = {{"message", r.blowup->message}, {"node", r.blowup->node}, {"time", number(r.blowup->time)}};
  } else {
    j["blowup"] = nullptr;
  }
  Json outputs = Json::object();
  for (const auto& [k, v] : r.outputs) outputs[k] = v;
  j["outputs"] = std::move(outputs);
  return j;
}

}  // namespace

std::string to_json(const std::vector<ScenarioReport>& reports, const Environment& env) {
  Json root;
  root["schema"] = "finsler-flow-report/1";
  root["environment"] = {{"compiler", env.compiler},   {"build_type", env.build_type},
                         {"system", env.system},       {"hostname", env.hostname},
                         {"fftw", env.fftw},           {"library_version", env.library_version},
                         {"timestamp", env.timestamp}, {"workers", env.workers}};
  Json list = Json::array();
  int passed = 0, failed = 0, blowups = 0;
  for (const auto& r : reports) {
    list.push_back(to_json(r));
    if (r.status == "pass") ++passed;
    else if (r.status == "blowup") ++blowups;
    else ++failed;
  }
  root["scenarios"] = std::move(list);
  root["summary"] = {{"scenarios", reports.size()}, {"passed", passed}, {"failed", failed}, {"blowups", blowups}};
  return root.dump(2) + "\n";
}

void write_json(const std::filesystem::path& path, const std::vector<ScenarioReport>& reports,
                const Environment& env) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report " + path.string());
  out << to_json(reports, env);
}

}  // namespace finsler::report
