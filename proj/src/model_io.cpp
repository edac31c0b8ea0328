#include "canon/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace canon {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(where + " is missing '" + key + "'");
  return *it;
}

int int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw std::invalid_argument(where + "." + key + " must be an integer");
  return v.get<int>();
}

double ext_real_of(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_ext_real(v.get<std::string>());
  throw std::invalid_argument("expected a number or \"-inf\"");
}

}  // namespace

ModelFile parse_model(const json& j) {
  only_keys(j, {"fermi", "custom"}, "model");
  ModelFile out;
  if (j.contains("fermi") == j.contains("custom"))
    throw std::invalid_argument("model needs exactly one of 'fermi' or 'custom'");
  if (j.contains("fermi")) {
    const json& f = j["fermi"];
    only_keys(f, {"k", "m", "beta", "v", "n"}, "fermi");
    FermiSpec s;
    s.k = int_field(f, "k", "fermi");
    s.m = int_field(f, "m", "fermi");
    const json& beta = field(f, "beta", "fermi");
    if (!beta.is_number()) throw std::invalid_argument("fermi.beta must be a number");
    s.beta = beta.get<double>();
    for (const auto& x : field(f, "v", "fermi")) s.v.push_back(x.get<double>());
    for (const auto& x : field(f, "n", "fermi")) {
      if (!x.is_number_integer()) throw std::invalid_argument("fermi.n entries must be integers");
      s.n.push_back(x.get<std::int64_t>());
    }
    out.fermi = std::move(s);
  } else {
    const json& c = j["custom"];
    only_keys(c, {"k", "m", "phi"}, "custom");
    CustomTables t;
    t.k = int_field(c, "k", "custom");
    t.m = int_field(c, "m", "custom");
    const json& phi = field(c, "phi", "custom");
    if (!phi.is_array()) throw std::invalid_argument("custom.phi must be an array of rows");
    for (const auto& row : phi) {
      if (!row.is_array()) throw std::invalid_argument("custom.phi rows must be arrays");
      std::vector<ExtReal> r;
      for (const auto& x : row) r.push_back(ext_real_of(x));
      t.phi.push_back(std::move(r));
    }
    out.custom = std::move(t);
  }
  return out;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("model file '" + path + "': " + e.what());
  }
  return parse_model(j);
}

json real_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json to_json(const ModelFile& model) {
  if (model.fermi) {
    const FermiSpec& f = *model.fermi;
    return json{{"fermi", {{"k", f.k}, {"m", f.m}, {"beta", f.beta}, {"v", f.v}, {"n", f.n}}}};
  }
  const CustomTables& t = *model.custom;
  json rows = json::array();
  for (const auto& row : t.phi) {
    json r = json::array();
    for (double x : row) r.push_back(real_to_json(x));
    rows.push_back(r);
  }
  return json{{"custom", {{"k", t.k}, {"m", t.m}, {"phi", rows}}}};
}

ModelSpec build_model(const ModelFile& model) {
  if (model.fermi) {
    if (static_cast<int>(model.fermi->v.size()) != model.fermi->m ||
        static_cast<int>(model.fermi->n.size()) != model.fermi->m)
      throw std::invalid_argument("fermi.v and fermi.n need m entries");
    return build_fermi(*model.fermi);
  }
  if (!model.custom) throw std::invalid_argument("empty model");
  return build_custom(model.custom->k, model.custom->m, model.custom->phi);
}

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string canonical_serialization(const ModelSpec& spec) {
  std::ostringstream os;
  os << "k=" << spec.k() << " m=" << spec.m() << " delta=" << format_real(spec.delta()) << '\n';
  for (int j = 0; j < spec.m(); ++j) {
    const auto& t = spec.potential(j).table();
    for (std::size_t x = 0; x < t.size(); ++x) os << (x ? " " : "") << format_real(t[x]);
    os << '\n';
  }
  return os.str();
}

std::string model_hash(const ModelSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_serialization(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace canon
