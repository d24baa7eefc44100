#include "shepherd/ppo/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace shepherd::ppo {

namespace {

constexpr const char* kHeader = "SHEPHERD-PPO v1";

struct RawTensor {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;  // row-major
};

void write_double(std::ostream& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("checkpoint: cannot format value");
  out << ' ';
  out.write(buf, end - buf);
}

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("checkpoint: " + what);
}

std::map<std::string, RawTensor> parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) fail("unsupported header '" + line + "' (expected '" + kHeader + "')");

  std::map<std::string, RawTensor> tensors;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, shape;
    if (!(ls >> name >> shape)) fail("malformed line " + std::to_string(line_no));
    RawTensor t;
    const auto x = shape.find('x');
    if (x == std::string::npos) fail("bad shape '" + shape + "' for " + name);
    try {
      t.rows = std::stol(shape.substr(0, x));
      t.cols = std::stol(shape.substr(x + 1));
    } catch (const std::exception&) {
      fail("bad shape '" + shape + "' for " + name);
    }
    if (t.rows < 1 || t.cols < 1) fail("bad shape '" + shape + "' for " + name);
    std::string token;
    while (ls >> token) {
      double v;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size())
        fail("bad value '" + token + "' in " + name);
      t.values.push_back(v);
    }
    if (static_cast<Eigen::Index>(t.values.size()) != t.rows * t.cols)
      fail(name + " declares " + shape + " but has " + std::to_string(t.values.size()) +
           " values");
    if (!tensors.emplace(name, std::move(t)).second) fail("duplicate tensor " + name);
  }
  return tensors;
}

const RawTensor& require(const std::map<std::string, RawTensor>& tensors,
                         const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail("missing tensor " + name);
  return it->second;
}

}  // namespace

void write_checkpoint(const PolicyNetwork& net, std::ostream& out) {
  out << kHeader << '\n';
  out << "meta.action_bound 1x1";
  write_double(out, net.spec().action_bound);
  out << '\n';
  const Vector& p = net.parameters();
  for (const auto& t : net.tensors()) {
    out << t.name << ' ' << t.rows << 'x' << t.cols;
    for (Eigen::Index r = 0; r < t.rows; ++r)
      for (Eigen::Index c = 0; c < t.cols; ++c) write_double(out, p[t.offset + c * t.rows + r]);
    out << '\n';
  }
}

void save_checkpoint(const PolicyNetwork& net, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(net, out);
  out.flush();
  if (!out) throw std::runtime_error("checkpoint: write to " + path.string() + " failed");
}

PolicyNetwork read_checkpoint(std::istream& in, const std::optional<NetworkSpec>& expected) {
  const auto tensors = parse(in);

  NetworkSpec spec;
  spec.action_bound = require(tensors, "meta.action_bound").values.at(0);
  spec.hidden.clear();
  int layers = 0;
  while (tensors.count("actor." + std::to_string(layers) + ".weight")) ++layers;
  if (layers < 1) fail("no actor layers");
  for (int l = 0; l < layers; ++l) {
    const auto& w = require(tensors, "actor." + std::to_string(l) + ".weight");
    if (l == 0) spec.observation_dim = static_cast<int>(w.cols);
    if (l + 1 < layers)
      spec.hidden.push_back(static_cast<int>(w.rows));
    else
      spec.action_dim = static_cast<int>(w.rows);
  }

  if (expected) {
    if (expected->observation_dim != spec.observation_dim ||
        expected->action_dim != spec.action_dim || expected->hidden != spec.hidden)
      fail("layer dimensions do not match the expected architecture");
  }

  PolicyNetwork net(spec);
  Vector& p = net.parameters();
  for (const auto& t : net.tensors()) {
    const auto& raw = require(tensors, t.name);
    if (raw.rows != t.rows || raw.cols != t.cols)
      fail(t.name + " has shape " + std::to_string(raw.rows) + "x" + std::to_string(raw.cols) +
           ", expected " + std::to_string(t.rows) + "x" + std::to_string(t.cols));
    for (Eigen::Index r = 0; r < t.rows; ++r)
      for (Eigen::Index c = 0; c < t.cols; ++c)
        p[t.offset + c * t.rows + r] = raw.values[r * t.cols + c];
  }
  if (tensors.size() != net.tensors().size() + 1) fail("unexpected extra tensors");
  return net;
}

PolicyNetwork load_checkpoint(const std::filesystem::path& path,
                              const std::optional<NetworkSpec>& expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in, expected);
}

}  // namespace shepherd::ppo
