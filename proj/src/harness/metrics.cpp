#include "graspsim/harness.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace graspsim {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

MetricsReport compute_metrics(const Predictions& predictions, const LabelSet& labels, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InputError("threshold must be in [0, 1]");
  std::vector<std::string> missing;
  MetricsReport m;
  m.threshold = threshold;
  for (const auto& [id, r] : predictions) {
    const auto it = labels.find(id);
    if (it == labels.end()) {
      missing.push_back(id);
      continue;
    }
    const bool pred = r >= threshold;
    const bool real = it->second >= threshold;
    if (pred && real) ++m.TP;
    else if (pred) ++m.FP;
    else if (real) ++m.FN;
    else ++m.TN;
  }
  if (!missing.empty()) {
    std::string msg = "no label for grasp ids:";
    for (const auto& id : missing) msg += " " + id;
    throw InputError(msg);
  }
  m.AP = m.TP + m.FP == 0 ? 1.0 : static_cast<double>(m.TP) / static_cast<double>(m.TP + m.FP);
  m.AR = m.TP + m.FN == 0 ? 1.0 : static_cast<double>(m.TP) / static_cast<double>(m.TP + m.FN);
  m.F1 = m.AP + m.AR == 0.0 ? 0.0 : 2.0 * m.AP * m.AR / (m.AP + m.AR);
  return m;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

}  // namespace

LabelSet read_labels(std::istream& in) {
  LabelSet labels;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    double r = 0.0;
    if (f.size() != 2) throw InputError(at_line(lineno) + "expected 'grasp_id,robustness'");
    if (!parse_number(f[1], r)) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError(at_line(lineno) + "robustness '" + f[1] + "' is not a number");
    }
    first = false;
    if (f[0].empty()) throw InputError(at_line(lineno) + "empty grasp id");
    if (!(r >= 0.0 && r <= 1.0)) throw InputError(at_line(lineno) + "robustness must be in [0, 1]");
    if (!labels.emplace(f[0], r).second) throw InputError(at_line(lineno) + "duplicate grasp id '" + f[0] + "'");
  }
  return labels;
}

LabelSet read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open label file " + path.string());
  return read_labels(in);
}

std::vector<GraspEntry> read_grasp_list(std::istream& in, const ScenarioConfig& config) {
  std::vector<GraspEntry> grasps;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    double x = 0.0, y = 0.0, angle = 0.0;
    if (f.size() < 4) throw InputError(at_line(lineno) + "expected 'id,center_x,center_y,angle'");
    if (!parse_number(f[1], x) || !parse_number(f[2], y) || !parse_number(f[3], angle)) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError(at_line(lineno) + "center and angle must be numbers");
    }
    first = false;
    if (f[0].empty()) throw InputError(at_line(lineno) + "empty grasp id");
    if (!ids.insert(f[0]).second) throw InputError(at_line(lineno) + "duplicate grasp id '" + f[0] + "'");
    GraspEntry g{f[0], config.grasp_at({x, y}, angle)};
    for (std::size_t k = 4; k < f.size(); ++k) {
      const auto eq = f[k].find('=');
      if (eq == std::string::npos) throw InputError(at_line(lineno) + "override '" + f[k] + "' is not key=value");
      const std::string key = trim(f[k].substr(0, eq)), value = trim(f[k].substr(eq + 1));
      if (key == "profile") {
        try {
          g.spec.jaw_profile = parse_jaw_profile(value);
        } catch (const InputError& e) {
          throw InputError(at_line(lineno) + e.what());
        }
        continue;
      }
      double v = 0.0;
      if (!parse_number(value, v) || !(v > 0.0))
        throw InputError(at_line(lineno) + "override '" + key + "' needs a positive number");
      if (key == "max_width") g.spec.max_width = v;
      else if (key == "closing_speed") g.spec.closing_speed = v;
      else if (key == "lift_speed") g.spec.lift_speed = v;
      else throw InputError(at_line(lineno) + "unknown override '" + key + "'");
    }
    grasps.push_back(std::move(g));
  }
  return grasps;
}

std::vector<GraspEntry> read_grasp_list(const std::filesystem::path& path, const ScenarioConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grasp list " + path.string());
  return read_grasp_list(in, config);
}

}  // namespace graspsim
