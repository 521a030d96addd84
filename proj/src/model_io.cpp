// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "stylo/error.hpp"
#include "stylo/gbdt.hpp"
#include "stylo/hexfloat.hpp"

namespace stylo {

namespace {

constexpr std::string_view kMagic = "stylo-gbdt-model";

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string_view next(const char* expecting) {
    if (!std::getline(in_, line_)) throw ParseError(lineno_ + 1, std::string("unexpected end of file, expected ") + expecting);
    ++lineno_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    return line_;
  }

  // "key=value" on a line of its own.
  std::string_view value_of(std::string_view key) {
    std::string_view line = next(std::string(key).c_str());
    if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != '=') {
      fail("expected '" + std::string(key) + "='");
    }
    return line.substr(key.size() + 1);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(lineno_, what); }

  template <class Int>
  Int to_int(std::string_view text) const {
    auto v = parse_int<Int>(text);
    if (!v) fail("malformed integer '" + std::string(text) + "'");
    return *v;
  }

  double to_double(std::string_view text) const {
    auto v = parse_double(text);
    if (!v) fail("malformed real '" + std::string(text) + "'");
    return *v;
  }

  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t lineno_ = 0;
};

void validate_tree(const Tree& tree, const std::vector<BinMapper>& bins, Reader& rd) {
  const auto n = tree.nodes.size();
  if (n == 0) rd.fail("tree has no nodes");
  std::vector<int> parents(n, 0);
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) {
      if (node.feature != -1 || node.left != -1 || node.right != -1) rd.fail("malformed leaf node");
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= bins.size()) rd.fail("split feature out of range");
    if (node.threshold >= bins[static_cast<std::size_t>(node.feature)].num_bins()) rd.fail("split threshold out of range");
    for (auto c : {node.left, node.right}) {
      if (c <= 0 || static_cast<std::size_t>(c) >= n) rd.fail("child index out of range");
      parents[static_cast<std::size_t>(c)] += 1;
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (parents[i] != 1) rd.fail("nodes do not form a binary tree");
  }
  // n - 1 edges, every non-root node with one parent: a tree iff all nodes are reachable from 0
  std::vector<std::size_t> stack{0};
  std::size_t seen = 0;
  while (!stack.empty() && seen <= n) {
    auto cur = stack.back();
    stack.pop_back();
    ++seen;
    if (!tree.nodes[cur].is_leaf()) {
      stack.push_back(static_cast<std::size_t>(tree.nodes[cur].left));
      stack.push_back(static_cast<std::size_t>(tree.nodes[cur].right));
    }
  }
  if (seen != n) rd.fail("nodes do not form a binary tree");
}

}  // namespace

void save_model(const GbdtEnsemble& model, std::ostream& out) {
  const auto& p = model.params;
  out << kMagic << '\n';
  out << "version=" << kModelFormatVersion << '\n';
  out << "num_features=" << model.num_features() << '\n';
  out << "params"
      << " num_leaves=" << p.num_leaves << " num_iterations=" << p.num_iterations << " max_depth=" << p.max_depth
      << " learning_rate=" << format_hex(p.learning_rate) << " bagging_fraction=" << format_hex(p.bagging_fraction)
      << " bagging_freq=" << p.bagging_freq << " drop_rate=" << format_hex(p.drop_rate) << " max_bins=" << p.max_bins
      << " min_data_in_leaf=" << p.min_data_in_leaf << " lambda_l2=" << format_hex(p.lambda_l2)
      << " min_gain=" << format_hex(p.min_gain) << " min_sum_hessian=" << format_hex(p.min_sum_hessian)
      << " seed=" << p.seed << '\n';
  out << "base_score=" << format_hex(model.base_score) << '\n';
  for (std::size_t f = 0; f < model.bins.size(); ++f) {
    out << "bins " << f;
    for (double ub : model.bins[f].upper_bounds()) out << ' ' << format_hex(ub);
    out << '\n';
  }
  out << "trees=" << model.trees.size() << '\n';
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    out << "tree " << t << " weight=" << format_hex(tree.weight) << '\n';
    auto emit = [&](const char* key, auto field) {
      out << key << '=';
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (i) out << ' ';
        field(tree.nodes[i]);
      }
      out << '\n';
    };
    emit("feature", [&](const TreeNode& n) { out << n.feature; });
    emit("threshold", [&](const TreeNode& n) { out << n.threshold; });
    emit("left", [&](const TreeNode& n) { out << n.left; });
    emit("right", [&](const TreeNode& n) { out << n.right; });
    emit("value", [&](const TreeNode& n) { out << format_hex(n.value); });
    out << "end\n";
  }
  out.flush();
  if (!out) throw Error("write failure while saving model");
}

std::string save_model(const GbdtEnsemble& model) {
  std::ostringstream os;
  save_model(model, os);
  return os.str();
}

GbdtEnsemble load_model(std::istream& in) {
  Reader rd(in);
  GbdtEnsemble model;

  if (rd.next("model header") != kMagic) rd.fail("not a stylo model file");
  auto version = rd.to_int<int>(rd.value_of("version"));
  if (version != kModelFormatVersion) {
    rd.fail("unsupported model format version " + std::to_string(version) + " (expected " +
            std::to_string(kModelFormatVersion) + ")");
  }
  auto num_features = rd.to_int<std::size_t>(rd.value_of("num_features"));

  {
    auto fields = split_spaces(rd.next("params"));
    if (fields.empty() || fields[0] != "params") rd.fail("expected params line");
    std::map<std::string_view, std::string_view> kv;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto eq = fields[i].find('=');
      if (eq == std::string_view::npos) rd.fail("malformed params field");
      kv[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    auto get = [&](std::string_view key) {
      auto it = kv.find(key);
      if (it == kv.end()) rd.fail("missing parameter '" + std::string(key) + "'");
      return it->second;
    };
    auto& p = model.params;
    p.num_leaves = rd.to_int<int>(get("num_leaves"));
    p.num_iterations = rd.to_int<int>(get("num_iterations"));
    p.max_depth = rd.to_int<int>(get("max_depth"));
    p.learning_rate = rd.to_double(get("learning_rate"));
    p.bagging_fraction = rd.to_double(get("bagging_fraction"));
    p.bagging_freq = rd.to_int<int>(get("bagging_freq"));
    p.drop_rate = rd.to_double(get("drop_rate"));
    p.max_bins = rd.to_int<int>(get("max_bins"));
    p.min_data_in_leaf = rd.to_int<int>(get("min_data_in_leaf"));
    p.lambda_l2 = rd.to_double(get("lambda_l2"));
    p.min_gain = rd.to_double(get("min_gain"));
    p.min_sum_hessian = rd.to_double(get("min_sum_hessian"));
    p.seed = rd.to_int<std::uint64_t>(get("seed"));
    if (kv.size() != 13) rd.fail("unexpected parameter in params line");
    try {
      p.validate();
    } catch (const Error& e) {
      rd.fail(e.what());
    }
  }
  model.base_score = rd.to_double(rd.value_of("base_score"));

  model.bins.reserve(num_features);
  for (std::size_t f = 0; f < num_features; ++f) {
    auto fields = split_spaces(rd.next("bins"));
    if (fields.size() < 3 || fields[0] != "bins" || rd.to_int<std::size_t>(fields[1]) != f) {
      rd.fail("expected 'bins " + std::to_string(f) + " ...'");
    }
    std::vector<double> bounds;
    for (std::size_t i = 2; i < fields.size(); ++i) bounds.push_back(rd.to_double(fields[i]));
    try {
      model.bins.emplace_back(std::move(bounds));
    } catch (const Error& e) {
      rd.fail(e.what());
    }
  }

  auto num_trees = rd.to_int<std::size_t>(rd.value_of("trees"));
  model.trees.reserve(num_trees);
  for (std::size_t t = 0; t < num_trees; ++t) {
    auto header = split_spaces(rd.next("tree header"));
    if (header.size() != 3 || header[0] != "tree" || rd.to_int<std::size_t>(header[1]) != t ||
        !header[2].starts_with("weight=")) {
      rd.fail("expected 'tree " + std::to_string(t) + " weight=...'");
    }
    Tree tree;
    tree.weight = rd.to_double(header[2].substr(7));
    if (!(tree.weight > 0.0)) rd.fail("tree weight must be positive");

    auto list = [&](std::string_view key) { return split_spaces(rd.value_of(key)); };
    auto features = list("feature");
    tree.nodes.resize(features.size());
    auto check_size = [&](const auto& v) {
      if (v.size() != tree.nodes.size()) rd.fail("node lists differ in length");
    };
    for (std::size_t i = 0; i < features.size(); ++i) tree.nodes[i].feature = rd.to_int<std::int32_t>(features[i]);
    auto thresholds = list("threshold");
    check_size(thresholds);
    for (std::size_t i = 0; i < thresholds.size(); ++i) tree.nodes[i].threshold = rd.to_int<std::uint32_t>(thresholds[i]);
    auto lefts = list("left");
    check_size(lefts);
    for (std::size_t i = 0; i < lefts.size(); ++i) tree.nodes[i].left = rd.to_int<std::int32_t>(lefts[i]);
    auto rights = list("right");
    check_size(rights);
    for (std::size_t i = 0; i < rights.size(); ++i) tree.nodes[i].right = rd.to_int<std::int32_t>(rights[i]);
    auto values = list("value");
    check_size(values);
    for (std::size_t i = 0; i < values.size(); ++i) tree.nodes[i].value = rd.to_double(values[i]);
    if (rd.next("end") != "end") rd.fail("expected 'end'");
    validate_tree(tree, model.bins, rd);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

GbdtEnsemble load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model " + path);
  return load_model(in);
}

}  // namespace stylo
