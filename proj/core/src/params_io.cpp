#include "csvd/params_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "csvd/errors.hpp"

namespace csvd {
namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError("missing field '" + where + key + "'");
  }
  return obj.at(key);
}

int int_field(const json& obj, const char* key, const std::string& where = "") {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw ParseError("field '" + where + key + "' must be an integer");
  return v.get<int>();
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ParseError("field '" + name + "' must be a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& obj, const char* key, std::size_t expected,
                                 const std::string& where) {
  const json& v = field(obj, key, where);
  const std::string name = where + key;
  if (!v.is_array() || v.size() != expected) {
    throw ParseError("field '" + name + "' must hold " + std::to_string(expected) + " values");
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    out.push_back(number(v[i], name + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int s = 0; s < 4; ++s) v |= std::uint32_t(in[at + s]) << (8 * s);
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_labels(const SiteGrid& grid, const std::vector<int>& labels) {
  if (!labels.empty() && labels.size() != grid.sites.size()) {
    throw ParameterError("expected one label per site (" + std::to_string(grid.sites.size()) +
                         "), got " + std::to_string(labels.size()));
  }
}

}  // namespace

std::string params_to_json(const SiteGrid& grid, const std::vector<int>& labels) {
  grid.validate();
  check_labels(grid, labels);
  json doc;
  doc["format_version"] = kParamFormatVersion;
  doc["m"] = grid.m;
  doc["n"] = grid.n;
  doc["n_e"] = grid.n_e;
  doc["neighborhood_radius"] = grid.neighborhood_radius;
  json sites = json::array();
  for (std::size_t k = 0; k < grid.sites.size(); ++k) {
    const ConvexSite& s = grid.sites[k];
    json theta = json::array(), b = json::array();
    for (const HalfPlaneEdge& e : s.edges) {
      theta.push_back(e.theta);
      b.push_back(e.b);
    }
    sites.push_back({{"p", {s.p.x, s.p.y}},
                     {"theta", std::move(theta)},
                     {"b", std::move(b)},
                     {"r", s.r},
                     {"label", labels.empty() ? 0 : labels[k]}});
  }
  doc["sites"] = std::move(sites);
  return doc.dump(1);
}

ParamFile params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed parameter file: ") + e.what());
  }

  const int version = int_field(doc, "format_version");
  if (version != kParamFormatVersion) {
    throw ParseError("field 'format_version': unsupported version " + std::to_string(version));
  }
  ParamFile out;
  SiteGrid& grid = out.grid;
  grid.m = int_field(doc, "m");
  grid.n = int_field(doc, "n");
  grid.n_e = int_field(doc, "n_e");
  grid.neighborhood_radius = int_field(doc, "neighborhood_radius");
  if (grid.m < 1 || grid.n < 1 || grid.n_e < 1) {
    throw ParseError("fields 'm', 'n', 'n_e' must be positive");
  }
  grid.cell_w = 1.0 / grid.m;
  grid.cell_h = 1.0 / grid.n;

  const json& sites = field(doc, "sites", "");
  const std::size_t expected = std::size_t(grid.m) * grid.n;
  if (!sites.is_array() || sites.size() != expected) {
    throw ParseError("field 'sites' must hold m*n = " + std::to_string(expected) + " records");
  }
  grid.sites.reserve(expected);
  out.labels.reserve(expected);
  for (std::size_t k = 0; k < expected; ++k) {
    const std::string where = "sites[" + std::to_string(k) + "].";
    const json& rec = sites[k];
    const std::vector<double> p = number_array(rec, "p", 2, where);
    const std::vector<double> theta = number_array(rec, "theta", grid.n_e, where);
    const std::vector<double> b = number_array(rec, "b", grid.n_e, where);
    ConvexSite site;
    site.p = {p[0], p[1]};
    site.r = number(field(rec, "r", where), where + "r");
    for (int e = 0; e < grid.n_e; ++e) site.edges.push_back({theta[e], b[e]});
    if (!site.valid()) throw ParseError("record '" + where + "' violates b > 0, r > 0");
    grid.sites.push_back(std::move(site));
    out.labels.push_back(int_field(rec, "label", where));
  }
  try {
    grid.validate();
  } catch (const ParameterError& e) {
    throw ParseError(e.what());
  }
  return out;
}

void save_params(const SiteGrid& grid, const std::vector<int>& labels,
                 const std::filesystem::path& path) {
  const std::string text = params_to_json(grid, labels);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ParamFile load_params(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return params_from_json(std::string(bytes.begin(), bytes.end()));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_tensor(const SiteGrid& grid, const std::vector<int>& labels) {
  grid.validate();
  check_labels(grid, labels);
  const std::size_t d = tensor_channels(grid.n_e);
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + 4 * grid.sites.size() * d);
  for (char c : kTensorMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kTensorVersion);
  put_u32(out, std::uint32_t(grid.m));
  put_u32(out, std::uint32_t(grid.n));
  put_u32(out, std::uint32_t(d));

  const std::vector<double> params = grid.params();
  const std::size_t stride = grid.params_per_site();
  for (std::size_t k = 0; k < grid.sites.size(); ++k) {
    for (std::size_t c = 0; c < stride; ++c) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(params[k * stride + c])));
    }
    const float label = labels.empty() ? 0.0f : static_cast<float>(labels[k]);
    put_u32(out, std::bit_cast<std::uint32_t>(label));
  }
  return out;
}

ParamFile decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kTensorHeaderBytes ||
      std::memcmp(bytes.data(), kTensorMagic, sizeof kTensorMagic) != 0) {
    throw ParseError("not a CSVD tensor (bad magic)");
  }
  if (get_u32(bytes, 8) != kTensorVersion) throw ParseError("unsupported tensor version");
  const std::uint32_t m = get_u32(bytes, 12), n = get_u32(bytes, 16), d = get_u32(bytes, 20);
  if (m < 1 || n < 1 || d < 6 || d % 2 != 0) throw ParseError("invalid tensor shape");
  const std::size_t expected = kTensorHeaderBytes + 4 * std::size_t(m) * n * d;
  if (bytes.size() != expected) {
    throw ParseError("tensor payload is " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(expected));
  }

  ParamFile out;
  SiteGrid& grid = out.grid;
  grid.m = int(m);
  grid.n = int(n);
  grid.n_e = int(d - 4) / 2;
  grid.cell_w = 1.0 / grid.m;
  grid.cell_h = 1.0 / grid.n;
  grid.sites.assign(std::size_t(m) * n, ConvexSite{{}, std::vector<HalfPlaneEdge>(grid.n_e), 1.0});

  const std::size_t stride = grid.params_per_site();
  std::vector<double> params(grid.param_count());
  std::size_t at = kTensorHeaderBytes;
  for (std::size_t k = 0; k < grid.sites.size(); ++k) {
    for (std::size_t c = 0; c < stride; ++c, at += 4) {
      params[k * stride + c] = std::bit_cast<float>(get_u32(bytes, at));
    }
    const float label = std::bit_cast<float>(get_u32(bytes, at));
    at += 4;
    if (!(label >= 0.0f) || label != std::floor(label)) {
      throw ParseError("site " + std::to_string(k) + " has a non-integral label channel");
    }
    out.labels.push_back(static_cast<int>(label));
  }
  grid.set_params(params);
  try {
    grid.validate();
  } catch (const ParameterError& e) {
    throw ParseError(std::string("tensor holds invalid sites: ") + e.what());
  }
  return out;
}

void save_tensor(const SiteGrid& grid, const std::vector<int>& labels,
                 const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_tensor(grid, labels);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ParamFile load_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file(path));
}

}  // namespace csvd
