#include "adrsim/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace adrsim::cli {

using nlohmann::json;

namespace {

/// Walks one JSON object, consuming known keys and rejecting the rest.
class ObjectReader {
public:
  ObjectReader(const json& obj, std::string path, const std::string& source)
      : obj_(obj), path_(std::move(path)), source_(source) {
    if (!obj_.is_object()) fail(path_.empty() ? "scenario" : path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw ScenarioError(source_ + ": " + field + ": " + why);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(field(key), "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number() || v->get<double>() != std::floor(v->get<double>())) {
        fail(field(key), "expected an integer");
      }
      out = v->get<int>();
    }
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned()) fail(field(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  ObjectReader child(const std::string& key, const json& v) { return {v, field(key), source_}; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) fail(field(key), "unknown field");
    }
  }

  const std::string& source() const { return source_; }

private:
  const json& obj_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

sim::Injection read_injection(ObjectReader& r, const std::string& where) {
  sim::Injection inj;
  double t = 0.0;
  if (r.get("time_s")) {
    r.number("time_s", t);
    inj.time_s = t;
  }
  bool after_warmup = false;
  r.boolean("after_warmup", after_warmup);
  if (inj.time_s && after_warmup) r.fail(where, "time_s and after_warmup are exclusive");
  if (!inj.time_s && !after_warmup) r.fail(where, "needs time_s or after_warmup");

  const bool has_add = r.get("add_devices") != nullptr;
  const bool has_delta = r.get("delta_db") != nullptr;
  if (has_add == has_delta) r.fail(where, "needs exactly one of add_devices or delta_db");
  if (has_add) {
    inj.kind = sim::Injection::Kind::add_devices;
    r.integer("add_devices", inj.add_devices);
    if (r.get("devices")) r.fail(r.field("devices"), "not allowed with add_devices");
  } else {
    inj.kind = sim::Injection::Kind::link_change;
    r.number("delta_db", inj.delta_db);
    const json* devs = r.get("devices");
    if (!devs) r.fail(r.field("devices"), "required for a link change");
    if (devs->is_string() && devs->get<std::string>() == "all") {
      inj.all_devices = true;
    } else if (devs->is_array()) {
      for (const auto& d : *devs) {
        if (!d.is_number_unsigned()) r.fail(r.field("devices"), "expected device ids");
        inj.devices.push_back(d.get<std::uint32_t>());
      }
    } else {
      r.fail(r.field("devices"), "expected an array of ids or \"all\"");
    }
  }
  r.finish();
  return inj;
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

sim::Scenario parse_scenario(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ScenarioError(source + ":" + line_col(text, byte) + ": " + msg);
  }

  sim::Scenario s;
  ObjectReader r(doc, "", source);
  r.integer("n_devices", s.n_devices);
  r.number("radius_m", s.radius_m);
  if (const json* v = r.get("device_distance_m"); v && !v->is_null()) {
    double d = 0.0;
    r.number("device_distance_m", d);
    s.device_distance_m = d;
  }
  r.number("sim_duration_s", s.sim_duration_s);
  r.number("mean_interarrival_s", s.mean_interarrival_s);
  r.number("sigma_db", s.sigma_db);
  r.integer("payload_bytes", s.payload_bytes);
  r.number("confirmed_fraction", s.confirmed_fraction);
  r.integer("sf_init", s.sf_init);
  r.integer("tp_init", s.tp_init);
  r.number("duty_cycle", s.duty_cycle);
  r.integer("gateway_tp_dbm", s.gateway_tp_dbm);
  r.number("warmup_max_s", s.warmup_max_s);
  r.u64("seed", s.seed);

  if (const json* v = r.get("trace_scope")) {
    const std::string scope = v->is_string() ? v->get<std::string>() : "";
    if (scope == "all") {
      s.trace_scope = sim::TraceScope::all;
    } else if (scope == "tracked") {
      s.trace_scope = sim::TraceScope::tracked;
    } else {
      r.fail("trace_scope", "expected \"all\" or \"tracked\"");
    }
  }

  if (const json* v = r.get("adr")) {
    ObjectReader a = r.child("adr", *v);
    a.integer("n", s.adr.n);
    a.integer("ack_limit", s.adr.ack_limit);
    a.integer("ack_delay", s.adr.ack_delay);
    a.number("margin_db", s.adr.margin_db);
    a.finish();
  }
  if (const json* v = r.get("retx")) {
    ObjectReader a = r.child("retx", *v);
    a.integer("max_attempts", s.retx.max_attempts);
    a.number("backoff_min_s", s.retx.backoff_min_s);
    a.number("backoff_max_s", s.retx.backoff_max_s);
    a.finish();
  }
  if (const json* v = r.get("link")) {
    ObjectReader a = r.child("link", *v);
    a.number("d0_m", s.link.d0_m);
    a.number("gamma", s.link.gamma);
    a.number("lpl_d0_db", s.link.lpl_d0_db);
    a.number("mean_offset_db", s.link.mean_offset_db);
    a.finish();
  }
  if (const json* v = r.get("phy")) {
    ObjectReader a = r.child("phy", *v);
    if (const json* sens = a.get("sensitivity_dbm")) {
      if (!sens->is_array() || sens->size() != 6) {
        a.fail(a.field("sensitivity_dbm"), "expected 6 values for SF7..SF12");
      }
      for (std::size_t i = 0; i < 6; ++i) {
        if (!(*sens)[i].is_number()) a.fail(a.field("sensitivity_dbm"), "expected numbers");
        s.phy.sensitivity_dbm[i] = (*sens)[i].get<double>();
      }
    }
    a.number("capture_threshold_db", s.phy.capture_threshold_db);
    a.number("noise_figure_db", s.phy.noise_figure_db);
    a.boolean("sub_sensitivity_interferes", s.phy.sub_sensitivity_interferes);
    a.finish();
  }
  if (const json* v = r.get("injections")) {
    if (!v->is_array()) r.fail("injections", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string where = "injections[" + std::to_string(i) + "]";
      ObjectReader a((*v)[i], where, source);
      s.injections.push_back(read_injection(a, where));
    }
  }
  r.finish();

  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ScenarioError(source + ": " + e.what());
  }
  return s;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const sim::Scenario& s) {
  json j;
  j["n_devices"] = s.n_devices;
  j["radius_m"] = s.radius_m;
  j["device_distance_m"] = s.device_distance_m ? json(*s.device_distance_m) : json(nullptr);
  j["sim_duration_s"] = s.sim_duration_s;
  j["mean_interarrival_s"] = s.mean_interarrival_s;
  j["sigma_db"] = s.sigma_db;
  j["payload_bytes"] = s.payload_bytes;
  j["confirmed_fraction"] = s.confirmed_fraction;
  j["sf_init"] = s.sf_init;
  j["tp_init"] = s.tp_init;
  j["duty_cycle"] = s.duty_cycle;
  j["gateway_tp_dbm"] = s.gateway_tp_dbm;
  j["warmup_max_s"] = s.warmup_max_s;
  j["seed"] = s.seed;
  j["trace_scope"] = s.trace_scope == sim::TraceScope::all ? "all" : "tracked";
  j["adr"] = {{"n", s.adr.n},
              {"ack_limit", s.adr.ack_limit},
              {"ack_delay", s.adr.ack_delay},
              {"margin_db", s.adr.margin_db}};
  j["retx"] = {{"max_attempts", s.retx.max_attempts},
               {"backoff_min_s", s.retx.backoff_min_s},
               {"backoff_max_s", s.retx.backoff_max_s}};
  j["link"] = {{"d0_m", s.link.d0_m},
               {"gamma", s.link.gamma},
               {"lpl_d0_db", s.link.lpl_d0_db},
               {"mean_offset_db", s.link.mean_offset_db}};
  j["phy"] = {{"sensitivity_dbm", s.phy.sensitivity_dbm},
              {"capture_threshold_db", s.phy.capture_threshold_db},
              {"noise_figure_db", s.phy.noise_figure_db},
              {"sub_sensitivity_interferes", s.phy.sub_sensitivity_interferes}};
  json injections = json::array();
  for (const auto& inj : s.injections) {
    json e;
    if (inj.time_s) {
      e["time_s"] = *inj.time_s;
    } else {
      e["after_warmup"] = true;
    }
    if (inj.kind == sim::Injection::Kind::add_devices) {
      e["add_devices"] = inj.add_devices;
    } else {
      e["delta_db"] = inj.delta_db;
      e["devices"] = inj.all_devices ? json("all") : json(inj.devices);
    }
    injections.push_back(std::move(e));
  }
  j["injections"] = std::move(injections);
  return j.dump(2) + "\n";
}

}  // namespace adrsim::cli
