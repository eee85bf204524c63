#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "riskcb/environments.hpp"
#include "riskcb/errors.hpp"

namespace rcb::env {

namespace {

DatasetSchema schema(std::string name, EnvKind kind, std::string target, std::optional<std::size_t> rows = {}) {
  DatasetSchema s;
  s.name = std::move(name);
  s.kind = kind;
  s.target = std::move(target);
  s.expected_rows = rows;
  return s;
}

std::vector<DatasetSchema> make_schemas() {
  std::vector<DatasetSchema> out;

  // OpenML 42092.
  auto& king = out.emplace_back(schema("king_county", EnvKind::PricingContinuous, "price", 21613));
  king.categorical = {"zipcode"};
  king.dates = {"date"};
  king.ignore = {"id"};

  // OpenML 43822.
  auto& perth = out.emplace_back(schema("perth", EnvKind::PricingContinuous, "PRICE", 33656));
  perth.categorical = {"SUBURB", "POSTCODE"};
  perth.dates = {"DATE_SOLD"};
  perth.ignore = {"ADDRESS", "NEAREST_STN", "NEAREST_SCH"};

  auto& pru = out.emplace_back(schema("prudential", EnvKind::PricingDiscrete, "Response", 59381));
  pru.categorical = {"Product_Info_2"};
  pru.ignore = {"Id"};
  pru.normalize_target = false;

  // OpenML 42712.
  auto& dc = out.emplace_back(schema("dc_bike", EnvKind::Inventory, "count", 17379));
  dc.categorical = {"season", "weather"};

  auto& london = out.emplace_back(schema("london_bike", EnvKind::Inventory, "cnt", 17414));
  london.categorical = {"weather_code", "season"};
  london.dates = {"timestamp"};

  auto& chicago = out.emplace_back(schema("chicago_bike", EnvKind::Inventory, "count", 34617));
  chicago.dates = {"date"};

  for (auto kind : {EnvKind::PricingDiscrete, EnvKind::PricingContinuous, EnvKind::Inventory}) {
    out.emplace_back(schema("synthetic_" + to_string(kind), kind, "y")).normalize_target = false;
  }
  return out;
}

const std::vector<DatasetSchema>& schemas() {
  static const std::vector<DatasetSchema> all = make_schemas();
  return all;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// RFC 4180 records: quoted fields may contain separators, doubled quotes and
// line breaks. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) throw IngestError("unterminated quoted field", line);
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

bool is_missing(const std::string& cell) {
  static const std::array<const char*, 8> markers = {"", "NA", "N/A", "NaN", "nan", "NULL", "null", "?"};
  return std::any_of(markers.begin(), markers.end(), [&](const char* m) { return cell == m; });
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct CalendarPoint {
  int month = 1;     // 1..12
  int weekday = -1;  // 0..6 when the day is known
  int hour = 0;
};

int to_int(const std::string& s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw std::invalid_argument("short date");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("non-digit in date");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

CalendarPoint make_point(int y, int m, int d, int hour) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  CalendarPoint p;
  p.month = m;
  p.weekday = static_cast<int>(weekday{sys_days{ymd}}.c_encoding());
  p.hour = hour;
  return p;
}

int parse_hour(const std::string& s, std::size_t pos) {
  // "HH:MM..." or "HHMMSS" after a separator.
  if (pos >= s.size()) return 0;
  return to_int(s, pos, 2);
}

// Accepts YYYY-MM-DD[ |T]HH..., YYYYMMDDTHHMMSS, DD/MM/YYYY, MM-YYYY and MM/YYYY.
CalendarPoint parse_date(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    const int hour = s.size() >= 13 ? parse_hour(s, 11) : 0;
    return make_point(to_int(s, 0, 4), to_int(s, 5, 2), to_int(s, 8, 2), hour);
  }
  if (s.size() >= 8 && std::all_of(s.begin(), s.begin() + 8, [](char c) { return c >= '0' && c <= '9'; })) {
    const int hour = s.size() >= 11 && s[8] == 'T' ? parse_hour(s, 9) : 0;
    return make_point(to_int(s, 0, 4), to_int(s, 4, 2), to_int(s, 6, 2), hour);
  }
  if (s.size() >= 10 && s[2] == '/' && s[5] == '/') {
    const int hour = s.size() >= 13 ? parse_hour(s, 11) : 0;
    return make_point(to_int(s, 6, 4), to_int(s, 3, 2), to_int(s, 0, 2), hour);
  }
  if (s.size() == 7 && (s[2] == '-' || s[2] == '/')) {
    CalendarPoint p;
    p.month = to_int(s, 0, 2);
    if (p.month < 1 || p.month > 12) throw std::invalid_argument("invalid month");
    to_int(s, 3, 4);
    return p;
  }
  throw std::invalid_argument("unrecognized date format");
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IngestError("missing column", 0, name);
  return static_cast<std::size_t>(it - header.begin());
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string hex(const unsigned char* data, std::size_t n) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(data[i]);
  return os.str();
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string finish() {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, out, &len);
    return hex(out, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

const DatasetSchema& builtin_schema(const std::string& name) {
  for (const auto& s : schemas()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& s : schemas()) known += (known.empty() ? "" : ", ") + s.name;
  throw std::invalid_argument("unknown dataset schema '" + name + "' (known: " + known + ")");
}

std::vector<std::string> builtin_schema_names() {
  std::vector<std::string> out;
  for (const auto& s : schemas()) out.push_back(s.name);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.finish();
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.finish();
}

std::unique_ptr<Environment> ingest_csv(const std::string& path, const DatasetSchema& schema,
                                        IngestSummary* summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);

  std::size_t line = 0;
  std::vector<std::string> header;
  if (!read_record(in, header, line)) throw IngestError("empty file " + path);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = trim(h);

  const std::size_t target_col = find_column(header, schema.target);
  std::vector<std::size_t> cat_cols, date_cols, num_cols;
  for (const auto& c : schema.categorical) cat_cols.push_back(find_column(header, c));
  for (const auto& c : schema.dates) date_cols.push_back(find_column(header, c));
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& name = header[j];
    if (j == target_col || contains(schema.categorical, name) || contains(schema.dates, name) ||
        contains(schema.ignore, name)) {
      continue;
    }
    num_cols.push_back(j);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (read_record(in, fields, line)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw IngestError("expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        rows.size() + 1);
    }
    for (auto& f : fields) f = trim(f);
    rows.push_back(fields);
  }
  if (rows.empty()) throw IngestError("no data rows in " + path);
  const std::size_t n = rows.size();

  // Target.
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = parse_number(rows[i][target_col]);
    if (!v) throw IngestError("non-numeric target cell '" + rows[i][target_col] + "'", i + 1, schema.target);
    target[i] = *v;
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  // Numeric features: standardized, missing cells at the column mean.
  for (std::size_t j : num_cols) {
    std::vector<double> col(n, 0.0);
    std::vector<bool> present(n, false);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = rows[i][j];
      if (is_missing(cell)) continue;
      const auto v = parse_number(cell);
      if (!v) throw IngestError("non-numeric cell '" + cell + "'", i + 1, header[j]);
      col[i] = *v;
      present[i] = true;
      sum += *v;
      ++count;
    }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!present[i]) col[i] = mean;
      var += (col[i] - mean) * (col[i] - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& v : col) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    names.push_back(header[j]);
    columns.push_back(std::move(col));
  }

  // Categorical: most frequent levels one-hot, the rest share "unseen".
  for (std::size_t j : cat_cols) {
    std::map<std::string, std::size_t> freq;
    for (const auto& r : rows) {
      if (!is_missing(r[j])) ++freq[r[j]];
    }
    std::vector<std::pair<std::string, std::size_t>> levels(freq.begin(), freq.end());
    std::stable_sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (levels.size() > schema.max_levels) levels.resize(schema.max_levels);
    std::map<std::string, std::size_t> slot;
    for (std::size_t k = 0; k < levels.size(); ++k) slot[levels[k].first] = k;
    std::vector<std::vector<double>> onehot(levels.size() + 1, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = slot.find(rows[i][j]);
      onehot[it == slot.end() ? levels.size() : it->second][i] = 1.0;
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      names.push_back(header[j] + "=" + levels[k].first);
      columns.push_back(std::move(onehot[k]));
    }
    names.push_back(header[j] + "=unseen");
    columns.push_back(std::move(onehot.back()));
  }

  // Dates: cyclical day-of-week, month and hour.
  for (std::size_t j : date_cols) {
    std::array<std::vector<double>, 6> cyc;
    for (auto& c : cyc) c.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      CalendarPoint p;
      try {
        p = parse_date(rows[i][j]);
      } catch (const std::invalid_argument& e) {
        throw IngestError(std::string("bad date '") + rows[i][j] + "': " + e.what(), i + 1, header[j]);
      }
      constexpr double tau = 2.0 * std::numbers::pi;
      if (p.weekday >= 0) {
        cyc[0][i] = std::sin(tau * p.weekday / 7.0);
        cyc[1][i] = std::cos(tau * p.weekday / 7.0);
      }
      cyc[2][i] = std::sin(tau * (p.month - 1) / 12.0);
      cyc[3][i] = std::cos(tau * (p.month - 1) / 12.0);
      cyc[4][i] = std::sin(tau * p.hour / 24.0);
      cyc[5][i] = std::cos(tau * p.hour / 24.0);
    }
    const std::array<const char*, 6> suffix = {"dow_sin", "dow_cos", "month_sin", "month_cos", "hour_sin", "hour_cos"};
    for (std::size_t k = 0; k < 6; ++k) {
      names.push_back(header[j] + ":" + suffix[k]);
      columns.push_back(std::move(cyc[k]));
    }
  }

  if (columns.empty()) throw IngestError("schema leaves no feature columns");
  const std::size_t dim = columns.size();
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) data[i * dim + k] = columns[k][i];
  }
  FeatureTable table(dim, std::move(data), names);

  const auto [tmin_it, tmax_it] = std::minmax_element(target.begin(), target.end());
  const double tmin = *tmin_it;
  const double tmax = *tmax_it;

  std::unique_ptr<Environment> env;
  switch (schema.kind) {
    case EnvKind::PricingDiscrete: {
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = target[i];
        if (y != std::floor(y) || y < 1.0 || y > static_cast<double>(kDiscreteLevels)) {
          throw IngestError("risk level must be an integer in 1..8", i + 1, schema.target);
        }
        labels[i] = static_cast<int>(y);
      }
      env = std::make_unique<PricingDiscreteEnv>(std::move(table), std::move(labels));
      break;
    }
    case EnvKind::PricingContinuous:
    case EnvKind::Inventory: {
      if (schema.normalize_target) {
        if (!(tmax > tmin)) throw IngestError("target is constant; cannot normalize", 0, schema.target);
        for (double& y : target) y = (y - tmin) / (tmax - tmin);
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (target[i] < 0.0 || target[i] > 1.0) throw IngestError("target outside [0,1]", i + 1, schema.target);
        }
      }
      if (schema.kind == EnvKind::PricingContinuous) {
        env = std::make_unique<PricingContinuousEnv>(std::move(table), std::move(target));
      } else {
        env = std::make_unique<InventoryEnv>(std::move(table), std::move(target));
      }
      break;
    }
    default:
      throw IngestError("schema kind " + to_string(schema.kind) + " is not a CSV environment");
  }

  const std::string hash = file_sha256(path);
  env->set_content_hash(hash);
  if (summary) {
    summary->rows = n;
    summary->feature_dim = dim;
    summary->expected_rows = schema.expected_rows;
    summary->feature_names = names;
    summary->sha256 = hash;
    summary->target_min = tmin;
    summary->target_max = tmax;
  }
  return env;
}

std::unique_ptr<QueryOptEnv> ingest_query_opt(const std::string& path, IngestSummary* summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  std::vector<double> data;
  std::vector<std::vector<double>> rewards;
  std::size_t dim = 0;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw IngestError(std::string("invalid JSON: ") + e.what(), line);
    }
    for (const char* field : {"features", "rewards"}) {
      if (!j.contains(field) || !j[field].is_array()) throw IngestError("missing numeric array", line, field);
      for (const auto& v : j[field]) {
        if (!v.is_number()) throw IngestError("non-numeric entry", line, field);
      }
    }
    auto x = j["features"].get<std::vector<double>>();
    auto r = j["rewards"].get<std::vector<double>>();
    if (x.empty()) throw IngestError("empty feature vector", line, "features");
    if (dim == 0) dim = x.size();
    if (x.size() != dim) throw IngestError("feature length differs from the first row", line, "features");
    if (r.size() < 2) throw IngestError("fewer than two configurations", line, "rewards");
    for (double v : r) {
      if (!std::isfinite(v)) throw IngestError("non-finite reward", line, "rewards");
    }
    data.insert(data.end(), x.begin(), x.end());
    rewards.push_back(std::move(r));
  }
  if (rewards.empty()) throw IngestError("empty file " + path);
  const std::size_t n = rewards.size();
  auto env = std::make_unique<QueryOptEnv>(FeatureTable(dim, std::move(data)), std::move(rewards));
  const std::string hash = file_sha256(path);
  env->set_content_hash(hash);
  if (summary) {
    summary->rows = n;
    summary->feature_dim = dim;
    summary->sha256 = hash;
  }
  return env;
}

}  // namespace rcb::env
