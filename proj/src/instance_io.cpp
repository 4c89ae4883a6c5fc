#include "spim/instance_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>
#include <unordered_set>
#include <vector>

namespace spim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("failed to format double");
  return std::string(buf.data(), ptr);
}

MaxCutInstance parse_instance(std::string_view text) {
  Metadata meta;
  std::size_t n = 0, m = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      if (!have_header) {
        std::string_view body = trim(line.substr(1));
        const auto colon = body.find(':');
        if (colon != std::string_view::npos && colon > 0)
          meta[std::string(trim(body.substr(0, colon)))] = std::string(trim(body.substr(colon + 1)));
      }
      continue;
    }
    const auto tokens = split_ws(line);
    if (!have_header) {
      if (tokens.size() != 2) throw ParseError(line_no, "header must be 'n m'");
      n = parse_number<std::size_t>(tokens[0], line_no, "vertex count");
      m = parse_number<std::size_t>(tokens[1], line_no, "edge count");
      if (n == 0) throw ParseError(line_no, "vertex count must be positive");
      have_header = true;
      edges.reserve(m);
      continue;
    }
    if (tokens.size() != 3) throw ParseError(line_no, "edge line must be 'l k w'");
    const auto l = parse_number<std::size_t>(tokens[0], line_no, "vertex index");
    const auto k = parse_number<std::size_t>(tokens[1], line_no, "vertex index");
    const auto w = parse_number<double>(tokens[2], line_no, "weight");
    if (l < 1 || l > n || k < 1 || k > n) throw ParseError(line_no, "vertex index out of range 1.." + std::to_string(n));
    if (l == k) throw ParseError(line_no, "self loop");
    if (edges.size() == m) throw ParseError(line_no, "more edges than declared (" + std::to_string(m) + ")");
    const auto lo = std::min(l, k) - 1, hi = std::max(l, k) - 1;
    if (!seen.insert(static_cast<std::uint64_t>(lo) * n + hi).second)
      throw ParseError(line_no, "duplicate pair (" + std::to_string(lo + 1) + "," + std::to_string(hi + 1) + ")");
    edges.push_back({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi), w});
  }
  if (!have_header) throw ParseError(0, "missing 'n m' header");
  if (edges.size() != m)
    throw ParseError(0, "declared " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));

  try {
    return MaxCutInstance::from_edges(n, std::move(edges), std::move(meta));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

std::string serialize_instance(const MaxCutInstance& instance) {
  std::string out;
  for (const auto& [key, value] : instance.metadata()) out += "# " + key + ": " + value + "\n";
  std::string body;
  std::size_t m = 0;
  auto emit = [&](const Edge& e) {
    body += std::to_string(e.l + 1);
    body += ' ';
    body += std::to_string(e.k + 1);
    body += ' ';
    body += format_double(e.w);
    body += '\n';
    ++m;
  };
  if (instance.is_low_rank())
    instance.for_each_edge(emit);
  else
    for (const Edge& e : instance.edges()) emit(e);
  out += std::to_string(instance.size()) + " " + std::to_string(m) + "\n";
  out += body;
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MaxCutInstance read_instance(const std::filesystem::path& path) { return parse_instance(read_file(path)); }

void write_instance(const std::filesystem::path& path, const MaxCutInstance& instance) {
  write_file_atomic(path, serialize_instance(instance));
}

std::string serialize_encoding(const Rank2Encoding& enc) {
  enc.validate();
  nlohmann::ordered_json j;
  j["n"] = enc.size();
  j["alpha"] = enc.alpha;
  j["beta"] = enc.beta;
  j["sign"] = enc.sign;
  std::vector<std::uint32_t> perm1(enc.aux.perm);
  for (auto& p : perm1) ++p;
  j["permutation"] = perm1;
  std::vector<int> sigma(enc.aux.sigma.begin(), enc.aux.sigma.end());
  j["sigma"] = sigma;
  return j.dump(2) + "\n";
}

Rank2Encoding parse_encoding(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("encoding: ") + e.what());
  }
  try {
    Rank2Encoding enc;
    enc.alpha = j.at("alpha").get<std::vector<double>>();
    enc.beta = j.at("beta").get<std::vector<double>>();
    enc.sign = j.at("sign").get<int>();
    const std::size_t n = enc.alpha.size();
    if (j.contains("permutation")) {
      for (auto p : j.at("permutation").get<std::vector<std::int64_t>>()) {
        if (p < 1) throw ParseError(0, "encoding: permutation entries are 1-based");
        enc.aux.perm.push_back(static_cast<std::uint32_t>(p - 1));
      }
    } else {
      enc.aux = SignedPermutation::identity(n);
    }
    if (j.contains("sigma")) {
      enc.aux.sigma.clear();
      for (int s : j.at("sigma").get<std::vector<int>>()) enc.aux.sigma.push_back(static_cast<std::int8_t>(s));
    } else {
      enc.aux.sigma.assign(n, 1);
    }
    enc.validate();
    return enc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("encoding: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, std::string("encoding: ") + e.what());
  }
}

Rank2Encoding read_encoding(const std::filesystem::path& path) { return parse_encoding(read_file(path)); }

void write_encoding(const std::filesystem::path& path, const Rank2Encoding& enc) {
  write_file_atomic(path, serialize_encoding(enc));
}

}  // namespace spim
