#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cli {

namespace {

using json = nlohmann::json;

// A JSON value together with its pointer, so every rejection names the spot.
struct Node {
  const json& v;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path.empty() ? "/" : path, msg); }

  Node at(const std::string& key) const { return Node{v.at(key), path + "/" + key}; }
  Node at(std::size_t i) const { return Node{v.at(i), path + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return v.is_object() && v.contains(key); }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!v.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = v.begin(); it != v.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError(path + "/" + it.key(), "unknown key");
  }

  std::size_t array_size() const {
    if (!v.is_array()) fail("expected an array");
    return v.size();
  }

  std::string str() const {
    if (!v.is_string()) fail("expected a string");
    return v.get<std::string>();
  }
  bool boolean() const {
    if (!v.is_boolean()) fail("expected true or false");
    return v.get<bool>();
  }
  double number() const {
    if (!v.is_number()) fail("expected a number");
    return v.get<double>();
  }
  std::int64_t integer() const {
    if (!v.is_number_integer()) fail("expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer() const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail("expected a nonnegative integer");
  }
  int positive_int() const {
    const std::int64_t x = integer();
    if (x < 1 || x > 1000000) fail("expected a positive integer");
    return static_cast<int>(x);
  }

  template <class F>
  auto list(F&& each) const {
    std::vector<decltype(each(*this))> out;
    const std::size_t n = array_size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(each(at(i)));
    return out;
  }
};

std::vector<int> positive_list(const Node& n) {
  return n.list([](const Node& e) { return e.positive_int(); });
}

std::vector<std::int64_t> coords(const Node& n, int rank) {
  auto out = n.list([](const Node& e) { return e.integer(); });
  if (static_cast<int>(out.size()) != rank) n.fail("expected " + std::to_string(rank) + " coordinates");
  return out;
}

Affine affine(const Node& n) {
  if (n.v.is_number_integer()) return Affine{0, n.integer()};
  if (n.array_size() != 2) n.fail("expected an integer or a pair [a, b] meaning a*j + b");
  return Affine{n.at(0).integer(), n.at(1).integer()};
}

VolumeSpec volume(const Node& n, int rank) {
  n.require_object({"name", "kind", "lo", "hi"});
  VolumeSpec s;
  s.name = n.at("name").str();
  if (s.name.empty() || s.name.find_first_of("/\\ .") != std::string::npos)
    n.at("name").fail("volume names must be non-empty and contain no '/', '\\', ' ' or '.'");
  const std::string kind = n.has("kind") ? n.at("kind").str() : "folner";
  if (kind == "folner") {
    s.kind = VolumeSpec::Kind::Folner;
  } else if (kind == "ball") {
    s.kind = VolumeSpec::Kind::Ball;
  } else if (kind == "box") {
    s.kind = VolumeSpec::Kind::Box;
    if (!n.has("lo") || !n.has("hi")) n.fail("box volumes need lo and hi");
    s.lo = n.at("lo").list(affine);
    s.hi = n.at("hi").list(affine);
    if (static_cast<int>(s.lo.size()) != rank) n.at("lo").fail("expected one bound per coordinate");
    if (static_cast<int>(s.hi.size()) != rank) n.at("hi").fail("expected one bound per coordinate");
  } else {
    n.at("kind").fail("unknown volume kind '" + kind + "'");
  }
  if (s.kind != VolumeSpec::Kind::Box && (n.has("lo") || n.has("hi")))
    n.fail("lo/hi only apply to box volumes");
  return s;
}

int colour_index(const Node& n, const std::vector<std::string>& alphabet) {
  if (n.v.is_number_integer()) {
    const std::int64_t i = n.integer();
    if (i < 0 || i >= static_cast<std::int64_t>(alphabet.size())) n.fail("colour index out of range");
    return static_cast<int>(i);
  }
  const std::string s = n.str();
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    if (alphabet[i] == s) return static_cast<int>(i);
  n.fail("unknown colour '" + s + "'");
}

ColouringSpec colouring(const Node& n, const RunConfig& cfg) {
  n.require_object({"kind", "alphabet", "weights", "seed", "cutoff", "n", "tile_colours"});
  ColouringSpec c;
  c.kind = n.has("kind") ? n.at("kind").str() : "trivial";
  if (c.kind == "trivial") {
    c.alphabet = {"0"};
  } else if (c.kind == "half_line_mod3") {
    if (cfg.group != "zd" || cfg.d != 1) n.at("kind").fail("half_line_mod3 lives on Z (group zd, d = 1)");
    c.alphabet = {"white", "black"};
    if (n.has("cutoff")) c.cutoff = n.at("cutoff").integer();
  } else if (c.kind == "percolation" || c.kind == "periodic") {
    if (!n.has("alphabet")) n.fail(c.kind + " colourings need an alphabet");
    c.alphabet = n.at("alphabet").list([](const Node& e) { return e.str(); });
    if (c.alphabet.empty()) n.at("alphabet").fail("alphabet must not be empty");
    for (std::size_t i = 0; i < c.alphabet.size(); ++i)
      if (c.alphabet[i].empty() || c.alphabet[i].find_first_of(",;\"\n\r") != std::string::npos)
        n.at("alphabet").at(i).fail("symbols must be non-empty and free of , ; \" and line breaks");
    std::set<std::string> uniq(c.alphabet.begin(), c.alphabet.end());
    if (uniq.size() != c.alphabet.size()) n.at("alphabet").fail("alphabet symbols must be distinct");
  } else {
    n.at("kind").fail("unknown colouring kind '" + c.kind + "'");
  }
  if (c.kind == "percolation") {
    if (n.has("weights")) {
      c.weights = n.at("weights").list([](const Node& e) { return e.unsigned_integer(); });
      if (c.weights.size() != c.alphabet.size()) n.at("weights").fail("need one weight per colour");
    } else {
      c.weights.assign(c.alphabet.size(), 1);
    }
    if (n.has("seed")) c.seed = n.at("seed").unsigned_integer();
  }
  if (c.kind == "periodic") {
    if (!n.has("n") || !n.has("tile_colours")) n.fail("periodic colourings need n and tile_colours");
    c.period_n = n.at("n").positive_int();
    const Node tc = n.at("tile_colours");
    for (std::size_t i = 0; i < tc.array_size(); ++i) c.tile_colours.push_back(colour_index(tc.at(i), c.alphabet));
  }
  return c;
}

OperatorSpec op(const Node& n, const RunConfig& cfg) {
  n.require_object({"kind", "retained", "edge_weight", "base", "table", "k", "range", "offsets"});
  OperatorSpec o;
  o.kind = n.has("kind") ? n.at("kind").str() : "adjacency";
  const auto& alphabet = cfg.colouring.alphabet;
  if (o.kind == "adjacency") {
  } else if (o.kind == "percolation") {
    if (!n.has("retained")) n.fail("percolation operators need the retained colours");
    const Node r = n.at("retained");
    for (std::size_t i = 0; i < r.array_size(); ++i) o.retained.push_back(colour_index(r.at(i), alphabet));
    if (n.has("edge_weight")) o.edge_weight = n.at("edge_weight").number();
  } else if (o.kind == "laplacian") {
    o.base = std::make_shared<OperatorSpec>(n.has("base") ? op(n.at("base"), cfg) : OperatorSpec{});
  } else if (o.kind == "zero") {
    if (n.has("k")) o.k = n.at("k").positive_int();
    if (n.has("range")) o.range = static_cast<int>(n.at("range").integer());
  } else if (o.kind == "colour_table") {
    if (!n.has("table")) n.fail("colour_table operators need a table");
    o.table = n.at("table").list([](const Node& e) { return e.number(); });
  } else if (o.kind == "periodic") {
    if (!n.has("offsets")) n.fail("periodic operators need offsets");
    if (n.has("k")) o.k = n.at("k").positive_int();
    const Node offs = n.at("offsets");
    for (std::size_t i = 0; i < offs.array_size(); ++i) {
      const Node e = offs.at(i);
      e.require_object({"offset", "block"});
      o.offsets.push_back(coords(e.at("offset"), cfg.rank()));
      std::vector<double> flat;
      const Node b = e.at("block");
      if (b.array_size() != static_cast<std::size_t>(o.k)) b.fail("block must have k rows");
      for (std::size_t r = 0; r < b.array_size(); ++r) {
        auto row = b.at(r).list([](const Node& x) { return x.number(); });
        if (row.size() != static_cast<std::size_t>(o.k)) b.at(r).fail("block rows must have k entries");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      o.blocks.push_back(std::move(flat));
    }
  } else {
    n.at("kind").fail("unknown operator kind '" + o.kind + "'");
  }
  return o;
}

RunConfig parse(const json& doc) {
  const Node root{doc, ""};
  root.require_object({"group", "d", "tile_n", "folner_j", "volumes", "colouring", "operator", "frequencies",
                       "tau", "workers", "ids", "percolation", "continuity", "folner_audit", "description"});
  RunConfig cfg;
  if (!root.has("group")) root.fail("missing group");
  cfg.group = root.at("group").str();
  if (cfg.group != "zd" && cfg.group != "h3") root.at("group").fail("group must be \"zd\" or \"h3\"");
  if (cfg.group == "zd") {
    if (!root.has("d")) root.fail("group zd needs d");
    cfg.d = static_cast<int>(root.at("d").integer());
    if (cfg.d < 1 || cfg.d > 4) root.at("d").fail("d must be between 1 and 4");
  } else if (root.has("d")) {
    root.at("d").fail("d only applies to group zd");
  }
  if (root.has("tile_n")) cfg.tile_n = positive_list(root.at("tile_n"));
  if (root.has("folner_j")) cfg.folner_j = positive_list(root.at("folner_j"));

  if (root.has("volumes")) {
    cfg.volumes = root.at("volumes").list([&](const Node& e) { return volume(e, cfg.rank()); });
    std::set<std::string> names;
    for (std::size_t i = 0; i < cfg.volumes.size(); ++i)
      if (!names.insert(cfg.volumes[i].name).second)
        root.at("volumes").at(i).at("name").fail("duplicate volume name");
  }
  if (cfg.volumes.empty()) cfg.volumes.push_back(VolumeSpec{"Q", VolumeSpec::Kind::Folner, {}, {}});

  const json no_colouring = json::object();
  cfg.colouring = colouring(root.has("colouring") ? root.at("colouring") : Node{no_colouring, "/colouring"}, cfg);
  cfg.op = root.has("operator") ? op(root.at("operator"), cfg) : OperatorSpec{};

  if (root.has("frequencies")) {
    const Node f = root.at("frequencies");
    f.require_object({"kind", "volume", "j"});
    if (f.has("kind")) cfg.freqs.kind = f.at("kind").str();
    if (cfg.freqs.kind != "empirical" && cfg.freqs.kind != "trivial" && cfg.freqs.kind != "percolation")
      f.at("kind").fail("frequencies must be empirical, trivial or percolation");
    if (cfg.freqs.kind == "percolation" && cfg.colouring.kind != "percolation")
      f.at("kind").fail("percolation frequencies need a percolation colouring");
    if (f.has("volume")) {
      cfg.freqs.volume = f.at("volume").str();
      bool found = false;
      for (const auto& v : cfg.volumes) found = found || v.name == cfg.freqs.volume;
      if (!found) f.at("volume").fail("unknown volume");
    }
    if (f.has("j")) cfg.freqs.j = f.at("j").positive_int();
  }
  if (cfg.freqs.volume.empty()) cfg.freqs.volume = cfg.volumes.front().name;

  if (root.has("tau")) {
    cfg.tau = root.at("tau").number();
    if (cfg.tau < 0.0) root.at("tau").fail("tau must be nonnegative");
  }
  if (root.has("workers")) cfg.workers = root.at("workers").positive_int();

  if (root.has("ids")) {
    const Node n = root.at("ids");
    n.require_object({"unshrunk", "clusters", "delta", "frequency_side"});
    if (n.has("unshrunk")) cfg.ids.unshrunk = n.at("unshrunk").boolean();
    if (n.has("clusters")) cfg.ids.clusters = n.at("clusters").boolean();
    if (n.has("delta")) cfg.ids.delta = n.at("delta").boolean();
    if (n.has("frequency_side")) cfg.ids.frequency_side = n.at("frequency_side").boolean();
  }
  if (root.has("percolation")) {
    const Node n = root.at("percolation");
    n.require_object({"seeds", "domains", "volume_n", "tolerance"});
    if (n.has("seeds")) cfg.percolation.seeds = n.at("seeds").list([](const Node& e) { return e.unsigned_integer(); });
    if (n.has("domains"))
      cfg.percolation.domains = n.at("domains").list([&](const Node& dom) {
        auto pts = dom.list([&](const Node& e) { return coords(e, cfg.rank()); });
        if (pts.empty()) dom.fail("pattern domains must not be empty");
        return pts;
      });
    if (n.has("volume_n")) cfg.percolation.volume_n = n.at("volume_n").positive_int();
    if (n.has("tolerance")) cfg.percolation.tolerance = n.at("tolerance").number();
  }
  if (root.has("continuity")) {
    const Node n = root.at("continuity");
    n.require_object({"eps", "volume_n", "centre", "width", "table_seed"});
    if (n.has("eps"))
      cfg.continuity.eps = n.at("eps").list([](const Node& e) {
        const double x = e.number();
        if (x < 0.0) e.fail("eps must be nonnegative");
        return x;
      });
    if (n.has("volume_n")) cfg.continuity.volume_n = n.at("volume_n").positive_int();
    if (n.has("centre")) cfg.continuity.centre = n.at("centre").number();
    if (n.has("width")) {
      cfg.continuity.width = n.at("width").number();
      if (!(cfg.continuity.width > 0.0)) n.at("width").fail("width must be positive");
    }
    if (n.has("table_seed")) cfg.continuity.table_seed = n.at("table_seed").unsigned_integer();
  }
  if (root.has("folner_audit")) {
    const Node n = root.at("folner_audit");
    n.require_object({"radii", "diameter_max_n"});
    if (n.has("radii")) cfg.audit.radii = positive_list(n.at("radii"));
    if (n.has("diameter_max_n")) cfg.audit.diameter_max_n = static_cast<int>(n.at("diameter_max_n").integer());
  }
  return cfg;
}

}  // namespace

const VolumeSpec& RunConfig::volume(const std::string& name) const {
  for (const auto& v : volumes)
    if (v.name == name) return v;
  throw ConfigError("/volumes", "unknown volume '" + name + "'");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse(doc);
  } catch (const json::exception& e) {
    throw ConfigError("/", e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("/", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cli
