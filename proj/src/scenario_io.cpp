#include "reservesim/scenario_io.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace reservesim {

namespace {

// ---- YAML helpers ---------------------------------------------------------------

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ParseError(msg + where(n)); }

void require_map(const YAML::Node& n, std::string_view what) {
  if (!n.IsMap()) fail(n, std::string(what) + " must be a mapping");
}

void check_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed, std::string_view what) {
  require_map(n, what);
  for (const auto& kv : n) {
    auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, "unknown key '" + key + "' in " + std::string(what));
    }
  }
}

std::string scalar(const YAML::Node& n, std::string_view key, std::string_view what) {
  auto v = n[std::string(key)];
  if (!v) fail(n, std::string(what) + " is missing '" + std::string(key) + "'");
  if (!v.IsScalar()) fail(v, "'" + std::string(key) + "' must be a scalar");
  return v.Scalar();
}

std::optional<std::string> opt_scalar(const YAML::Node& n, std::string_view key) {
  auto v = n[std::string(key)];
  if (!v) return std::nullopt;
  if (!v.IsScalar()) fail(v, "'" + std::string(key) + "' must be a scalar");
  return v.Scalar();
}

template <class F>
auto convert(const YAML::Node& n, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
}

Money money_of(const YAML::Node& n, std::string_view key, std::string_view what) {
  auto s = scalar(n, key, what);
  return convert(n[std::string(key)], [&] { return Money::parse(s); });
}

Ratio ratio_of(const YAML::Node& n, const std::string& text) {
  return convert(n, [&] { return Ratio::parse(text); });
}

bool bool_of(const YAML::Node& n, std::string_view key, bool dflt) {
  auto v = n[std::string(key)];
  if (!v) return dflt;
  return convert(v, [&] { return v.as<bool>(); });
}

int int_of(const YAML::Node& n, std::string_view key) {
  auto v = n[std::string(key)];
  int out = convert(v, [&] { return v.as<int>(); });
  if (out < 0) fail(v, "'" + std::string(key) + "' must not be negative");
  return out;
}

AmountSpec amount_of(const YAML::Node& parent, std::string_view key, std::string_view what) {
  auto n = parent[std::string(key)];
  if (!n) fail(parent, std::string(what) + " is missing '" + std::string(key) + "'");
  if (n.IsScalar()) {
    const std::string& s = n.Scalar();
    if (s == "headroom") return HeadroomAmount{};
    if (s == "full") return ShareOfOutstanding{Ratio::one()};
    return convert(n, [&] { return Money::parse(s); });
  }
  check_keys(n, {"share", "of", "security", "tranche"}, "amount");
  Ratio share = ratio_of(n, scalar(n, "share", "amount"));
  std::string of = scalar(n, "of", "amount");
  if (of == "security_face") return ShareOfSecurityFace{share, scalar(n, "security", "amount")};
  if (of == "tranche_face") {
    return ShareOfTrancheFace{share, scalar(n, "security", "amount"), scalar(n, "tranche", "amount")};
  }
  if (of == "outstanding") return ShareOfOutstanding{share};
  fail(n, "amount 'of' must be security_face, tranche_face or outstanding");
}

LoanKind loan_kind_of(const YAML::Node& n) {
  auto k = opt_scalar(n, "kind");
  return k ? convert(n, [&] { return parse_loan_kind(*k); }) : LoanKind::Mortgage;
}

Event parse_event(const YAML::Node& n) {
  require_map(n, "event");
  const std::string op = scalar(n, "op", "event");
  Event ev;
  auto keys = [&](std::initializer_list<std::string_view> extra) {
    std::vector<std::string_view> all{"op", "label", "override"};
    all.insert(all.end(), extra.begin(), extra.end());
    for (const auto& kv : n) {
      auto key = kv.first.as<std::string>();
      if (std::find(all.begin(), all.end(), key) == all.end()) {
        fail(kv.first, "unknown key '" + key + "' in " + op + " event");
      }
    }
  };

  if (op == "noop") {
    keys({});
    ev.op = NoOp{};
  } else if (op == "open_account") {
    keys({"bank", "account", "kind"});
    auto kind = opt_scalar(n, "kind");
    ev.op = OpenAccountOp{scalar(n, "bank", op), scalar(n, "account", op),
                          kind ? convert(n, [&] { return parse_account_kind(*kind); }) : AccountKind::NetTransaction};
  } else if (op == "transfer") {
    keys({"from", "to", "amount"});
    ev.op = TransferOp{scalar(n, "from", op), scalar(n, "to", op), amount_of(n, "amount", op)};
  } else if (op == "originate") {
    keys({"bank", "kind", "amount", "to", "id"});
    ev.op = OriginateOp{scalar(n, "bank", op), loan_kind_of(n), amount_of(n, "amount", op), scalar(n, "to", op),
                        opt_scalar(n, "id")};
  } else if (op == "securitize") {
    keys({"bank", "id", "loans", "tranches"});
    SecuritizeOp s{scalar(n, "bank", op), scalar(n, "id", op), std::nullopt, {}};
    if (auto loans = n["loans"]) {
      if (loans.IsScalar() && loans.Scalar() == "held") {
        // default selection
      } else if (loans.IsSequence()) {
        s.loans.emplace();
        for (const auto& l : loans) s.loans->push_back(l.as<std::string>());
      } else {
        fail(loans, "'loans' must be 'held' or a list of loan ids");
      }
    }
    auto tranches = n["tranches"];
    if (!tranches) {
      s.tranches.push_back(TrancheSpec{"whole", std::nullopt, std::nullopt});
    } else {
      if (!tranches.IsSequence()) fail(tranches, "'tranches' must be a list");
      for (const auto& t : tranches) {
        check_keys(t, {"label", "amount", "share"}, "tranche");
        TrancheSpec spec{scalar(t, "label", "tranche"), std::nullopt, std::nullopt};
        if (t["amount"]) spec.amount = money_of(t, "amount", "tranche");
        if (t["share"]) spec.share = ratio_of(t["share"], scalar(t, "share", "tranche"));
        s.tranches.push_back(std::move(spec));
      }
    }
    ev.op = std::move(s);
  } else if (op == "sell") {
    keys({"security", "tranche", "buyer", "price"});
    ev.op = SellOp{scalar(n, "security", op), opt_scalar(n, "tranche").value_or("whole"), scalar(n, "buyer", op),
                   amount_of(n, "price", op)};
  } else if (op == "book") {
    keys({"bank", "security", "tranche"});
    ev.op = BookToEquityOp{scalar(n, "bank", op), scalar(n, "security", op), opt_scalar(n, "tranche").value_or("whole")};
  } else if (op == "bonus") {
    keys({"bank", "amount", "to"});
    ev.op = BonusOp{scalar(n, "bank", op), amount_of(n, "amount", op), scalar(n, "to", op)};
  } else if (op == "repay") {
    keys({"loan", "amount", "payer"});
    ev.op = RepayOp{scalar(n, "loan", op), amount_of(n, "amount", op), scalar(n, "payer", op)};
  } else if (op == "interest") {
    keys({"loan", "amount", "payer"});
    ev.op = InterestOp{scalar(n, "loan", op), amount_of(n, "amount", op), scalar(n, "payer", op)};
  } else if (op == "default") {
    keys({"loan", "loss"});
    ev.op = DefaultOp{scalar(n, "loan", op), amount_of(n, "loss", op)};
  } else {
    fail(n, "unknown event op '" + op + "'");
  }
  ev.label = opt_scalar(n, "label").value_or("");
  ev.override_regulation = bool_of(n, "override", false);
  return ev;
}

GeneratorSpec parse_generator(const YAML::Node& run) {
  GeneratorSpec g;
  const std::string name = scalar(run, "generator", "run");
  if (name == "textbook") {
    g.kind = GeneratorKind::Textbook;
  } else if (name == "loophole1") {
    g.kind = GeneratorKind::Loophole1;
  } else if (name == "loophole2") {
    g.kind = GeneratorKind::Loophole2;
  } else {
    fail(run["generator"], "unknown generator '" + name + "'");
  }
  if (g.kind == GeneratorKind::Textbook) {
    if (run["cycles"]) fail(run["cycles"], "textbook generator takes 'rounds', not 'cycles'");
    if (run["rounds"]) g.count = int_of(run, "rounds");
    if (run["initial_deposit"]) g.initial_deposit = money_of(run, "initial_deposit", "run");
  } else {
    if (run["rounds"]) fail(run["rounds"], "loophole generators take 'cycles', not 'rounds'");
    if (run["initial_deposit"]) fail(run["initial_deposit"], "'initial_deposit' applies to the textbook generator");
    if (run["cycles"]) g.count = int_of(run, "cycles");
  }
  g.setup = bool_of(run, "setup", true);
  auto& o = g.loophole;
  if (auto v = opt_scalar(run, "lender")) o.lender = *v;
  if (auto v = opt_scalar(run, "counterparty")) o.counterparty = *v;
  if (run["setup_loan"]) o.setup_loan = money_of(run, "setup_loan", "run");
  if (run["cycle_loan"]) o.cycle_loan = money_of(run, "cycle_loan", "run");
  if (run["kind"]) o.kind = loan_kind_of(run);
  if (auto v = opt_scalar(run, "senior_share")) o.senior_share = ratio_of(run["senior_share"], *v);
  if (auto v = opt_scalar(run, "price_share")) o.price_share = ratio_of(run["price_share"], *v);
  if (auto v = opt_scalar(run, "bonus_share")) o.bonus_share = ratio_of(run["bonus_share"], *v);
  return g;
}

// ---- CSV -----------------------------------------------------------------------------

const std::vector<std::string> kSeriesColumns = {
    "step",         "label",        "event",       "money_supply", "bank_held_loans", "external_mbs", "retained_mbs",
    "equity_mbs",   "total_debt",   "deposit_cash", "equity_cash", "system_cash",     "debt_to_money"};
const std::vector<std::string> kBankColumns = {"deposits",       "loans",          "cash", "equity_cash",
                                               "equity_instruments", "equity_mbs_face", "equity_capital", "rwa", "class", "failed"};

std::string format_ratio(const std::optional<Ratio>& r) {
  if (!r) return "";
  // Six decimals, rounded half up, computed exactly.
  __int128 scaled = detail::floor_div(static_cast<__int128>(r->num()) * 2000000 + r->den(), 2 * static_cast<__int128>(r->den()));
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  auto whole = static_cast<long long>(scaled / 1000000);
  auto frac = static_cast<long long>(scaled % 1000000);
  return fmt::format("{}{}.{:06d}", neg ? "-" : "", whole, frac);
}

std::int64_t parse_i64(const std::string& s, std::string_view column) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw ParseError("column '" + std::string(column) + "': not an integer: '" + s + "'");
  }
  return v;
}

Capitalization parse_class(const std::string& s) {
  if (s == "well") return Capitalization::Well;
  if (s == "adequate") return Capitalization::Adequate;
  if (s == "under") return Capitalization::Under;
  throw ParseError("unknown capitalization class '" + s + "'");
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

} // namespace

ScenarioFile parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ParseError("scenario file is empty");
  check_keys(root, {"params", "banks", "run", "outputs"}, "scenario");

  ScenarioFile file;
  auto& script = file.script;

  if (auto params = root["params"]) {
    require_map(params, "params");
    for (const auto& kv : params) {
      auto name = kv.first.as<std::string>();
      auto value = ratio_of(kv.second, kv.second.as<std::string>());
      convert(kv.first, [&] {
        script.params.set(name, value);
        return 0;
      });
    }
    convert(params, [&] {
      script.params.validate();
      return 0;
    });
  }

  if (auto banks = root["banks"]) {
    if (!banks.IsSequence()) fail(banks, "'banks' must be a list");
    for (const auto& b : banks) {
      check_keys(b, {"id", "deposits", "equity", "accounts"}, "bank");
      BankInit init{scalar(b, "id", "bank"), money_of(b, "deposits", "bank"), money_of(b, "equity", "bank"), {}};
      if (auto accts = b["accounts"]) {
        if (!accts.IsSequence()) fail(accts, "'accounts' must be a list");
        for (const auto& a : accts) {
          check_keys(a, {"id", "kind"}, "account");
          auto kind = opt_scalar(a, "kind");
          init.extra_accounts.emplace_back(
              scalar(a, "id", "account"),
              kind ? convert(a, [&] { return parse_account_kind(*kind); }) : AccountKind::NetTransaction);
        }
      }
      script.banks.push_back(std::move(init));
    }
  }

  if (auto run = root["run"]) {
    check_keys(run,
               {"generator", "cycles", "rounds", "setup", "lender", "counterparty", "setup_loan", "cycle_loan", "kind",
                "senior_share", "price_share", "bonus_share", "initial_deposit", "events"},
               "run");
    if (run["generator"]) {
      script.generator = parse_generator(run);
    } else {
      for (auto key : {"cycles", "rounds", "setup", "lender", "counterparty", "setup_loan", "cycle_loan", "kind",
                       "senior_share", "price_share", "bonus_share", "initial_deposit"}) {
        if (run[key]) fail(run[key], std::string("'") + key + "' needs a generator");
      }
    }
    if (auto events = run["events"]) {
      if (!events.IsSequence()) fail(events, "'events' must be a list");
      for (const auto& e : events) script.events.push_back(parse_event(e));
    }
  }

  if (auto outputs = root["outputs"]) {
    if (!outputs.IsSequence()) fail(outputs, "'outputs' must be a list");
    for (const auto& o : outputs) {
      check_keys(o, {"format", "path"}, "output");
      auto fmt_name = scalar(o, "format", "output");
      OutputSpec spec;
      if (fmt_name == "csv") {
        spec.format = OutputFormat::Csv;
      } else if (fmt_name == "json") {
        spec.format = OutputFormat::Json;
      } else if (fmt_name == "table") {
        spec.format = OutputFormat::Table;
      } else {
        fail(o, "unknown output format '" + fmt_name + "'");
      }
      spec.path = scalar(o, "path", "output");
      file.outputs.push_back(std::move(spec));
    }
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void apply_param_override(RegulatoryParams& params, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError("parameter override must be name=value: '" + std::string(assignment) + "'");
  try {
    params.set(assignment.substr(0, eq), Ratio::parse(assignment.substr(eq + 1)));
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

// ---- CSV ------------------------------------------------------------------------------

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_series_csv(std::ostream& os, const MetricsSeries& series) {
  std::vector<std::string> bank_ids;
  if (!series.snapshots.empty())
    for (const auto& b : series.snapshots.front().banks) bank_ids.push_back(b.id);

  std::vector<std::string> header = kSeriesColumns;
  for (const auto& id : bank_ids)
    for (const auto& c : kBankColumns) header.push_back(id + "." + c);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_escape(header[i]);
  os << '\n';

  auto m = [](Money v) { return std::to_string(v.minor_units()); };
  for (const auto& s : series.snapshots) {
    os << s.step << ',' << csv_escape(s.label) << ',' << csv_escape(s.event) << ',' << m(s.money_supply) << ','
       << m(s.bank_held_loans) << ',' << m(s.external_mbs) << ',' << m(s.retained_mbs) << ',' << m(s.equity_mbs) << ','
       << m(s.total_debt()) << ',' << m(s.deposit_cash) << ',' << m(s.equity_cash) << ',' << m(s.system_cash()) << ','
       << format_ratio(s.debt_to_money());
    if (s.banks.size() != bank_ids.size()) throw std::logic_error("bank roster changed during a run");
    for (std::size_t i = 0; i < s.banks.size(); ++i) {
      const auto& b = s.banks[i];
      if (b.id != bank_ids[i]) throw std::logic_error("bank roster changed during a run");
      os << ',' << m(b.deposits) << ',' << m(b.loans) << ',' << m(b.cash) << ',' << m(b.equity_cash) << ','
         << m(b.equity_instruments) << ',' << m(b.equity_mbs_face) << ',' << m(b.equity_capital) << ',' << m(b.rwa) << ','
         << to_string(b.capitalization) << ',' << (b.failed ? 1 : 0);
    }
    os << '\n';
  }
  if (series.failure) {
    std::string msg = *series.failure;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    os << "# failed: " << msg << '\n';
  }
}

MetricsSeries parse_series_csv(std::string_view text) {
  MetricsSeries series;
  std::string body;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("# failed: ", 0) == 0) {
      series.failure = line.substr(10);
      continue;
    }
    body += line;
    body += '\n';
  }
  auto rows = parse_csv_rows(body);
  if (rows.empty()) throw ParseError("series CSV has no header");
  const auto& header = rows.front();
  if (header.size() < kSeriesColumns.size() ||
      !std::equal(kSeriesColumns.begin(), kSeriesColumns.end(), header.begin())) {
    throw ParseError("series CSV header does not match the metrics schema");
  }
  const std::size_t extra = header.size() - kSeriesColumns.size();
  if (extra % kBankColumns.size() != 0) throw ParseError("series CSV has a partial bank column group");
  std::vector<std::string> bank_ids;
  for (std::size_t i = kSeriesColumns.size(); i < header.size(); i += kBankColumns.size()) {
    const std::string& first = header[i];
    auto dot = first.rfind('.');
    if (dot == std::string::npos) throw ParseError("bad bank column '" + first + "'");
    std::string id = first.substr(0, dot);
    for (std::size_t j = 0; j < kBankColumns.size(); ++j) {
      if (header[i + j] != id + "." + kBankColumns[j]) throw ParseError("bad bank column '" + header[i + j] + "'");
    }
    bank_ids.push_back(std::move(id));
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) throw ParseError("series CSV row " + std::to_string(r) + " has wrong width");
    auto money = [&](std::size_t i) { return Money::minor(parse_i64(row[i], header[i])); };
    MetricsSnapshot s;
    s.step = static_cast<std::uint64_t>(parse_i64(row[0], "step"));
    s.label = row[1];
    s.event = row[2];
    s.money_supply = money(3);
    s.bank_held_loans = money(4);
    s.external_mbs = money(5);
    s.retained_mbs = money(6);
    s.equity_mbs = money(7);
    s.deposit_cash = money(9);
    s.equity_cash = money(10);
    if (money(8) != s.total_debt()) throw ParseError("total_debt disagrees with its components at step " + row[0]);
    if (money(11) != s.system_cash()) throw ParseError("system_cash disagrees with its components at step " + row[0]);
    if (row[12] != format_ratio(s.debt_to_money())) throw ParseError("debt_to_money disagrees at step " + row[0]);
    std::size_t i = kSeriesColumns.size();
    for (const auto& id : bank_ids) {
      BankSnapshot b;
      b.id = id;
      b.deposits = money(i);
      b.loans = money(i + 1);
      b.cash = money(i + 2);
      b.equity_cash = money(i + 3);
      b.equity_instruments = money(i + 4);
      b.equity_mbs_face = money(i + 5);
      b.equity_capital = money(i + 6);
      b.rwa = money(i + 7);
      b.capitalization = parse_class(row[i + 8]);
      if (row[i + 9] != "0" && row[i + 9] != "1") throw ParseError("failed flag must be 0 or 1");
      b.failed = row[i + 9] == "1";
      s.banks.push_back(std::move(b));
      i += kBankColumns.size();
    }
    series.snapshots.push_back(std::move(s));
  }
  return series;
}

void write_run_json(std::ostream& os, const RunResult& run) {
  using nlohmann::ordered_json;
  auto m = [](Money v) { return v.minor_units(); };
  ordered_json doc;
  doc["status"] = std::string(to_string(run.status));
  doc["failure"] = run.series.failure ? ordered_json(*run.series.failure) : ordered_json(nullptr);
  doc["minor_units_per_unit"] = Money::kMinorPerUnit;
  ordered_json snaps = ordered_json::array();
  for (const auto& s : run.series.snapshots) {
    ordered_json j;
    j["step"] = s.step;
    j["label"] = s.label;
    j["event"] = s.event;
    j["money_supply"] = m(s.money_supply);
    j["bank_held_loans"] = m(s.bank_held_loans);
    j["external_mbs"] = m(s.external_mbs);
    j["retained_mbs"] = m(s.retained_mbs);
    j["equity_mbs"] = m(s.equity_mbs);
    j["total_debt"] = m(s.total_debt());
    j["deposit_cash"] = m(s.deposit_cash);
    j["equity_cash"] = m(s.equity_cash);
    j["system_cash"] = m(s.system_cash());
    j["debt_to_money"] = format_ratio(s.debt_to_money());
    ordered_json banks = ordered_json::array();
    for (const auto& b : s.banks) {
      banks.push_back(ordered_json{{"id", b.id},
                                   {"deposits", m(b.deposits)},
                                   {"loans", m(b.loans)},
                                   {"cash", m(b.cash)},
                                   {"equity_cash", m(b.equity_cash)},
                                   {"equity_instruments", m(b.equity_instruments)},
                                   {"equity_mbs_face", m(b.equity_mbs_face)},
                                   {"equity_capital", m(b.equity_capital)},
                                   {"rwa", m(b.rwa)},
                                   {"class", std::string(to_string(b.capitalization))},
                                   {"failed", b.failed}});
    }
    j["banks"] = std::move(banks);
    snaps.push_back(std::move(j));
  }
  doc["snapshots"] = std::move(snaps);

  ordered_json breaches = ordered_json::array();
  for (const auto& b : run.breaches) {
    breaches.push_back(ordered_json{{"step", b.step},
                                    {"bank", b.breach.bank},
                                    {"requested", m(b.breach.requested)},
                                    {"headroom", m(b.breach.headroom)},
                                    {"overridden", b.breach.overridden}});
  }
  doc["breaches"] = std::move(breaches);

  ordered_json shortfalls = ordered_json::array();
  for (const auto& s : run.shortfalls) {
    shortfalls.push_back(ordered_json{{"step", s.step},
                                      {"loan", s.loan},
                                      {"depositor_shortfall", m(s.report.depositor_shortfall)},
                                      {"failed_banks", s.report.failed_banks}});
  }
  doc["shortfalls"] = std::move(shortfalls);
  os << doc.dump(2) << '\n';
}

void write_tables(std::ostream& os, const MetricsSeries& series) {
  bool any_label = std::any_of(series.snapshots.begin(), series.snapshots.end(),
                               [](const MetricsSnapshot& s) { return !s.label.empty(); });
  bool first = true;
  for (const auto& s : series.snapshots) {
    if (any_label && s.label.empty()) continue;
    if (!first) os << '\n';
    first = false;
    os << (s.label.empty() ? "Step " + std::to_string(s.step) + " (" + s.event + ")" : s.label) << '\n';
    os << "Bank | Deposits | Loan | Cash | Equity Capital | \xCE\xA3 Deposits | \xCE\xA3 Bank Loans + MBS\n";
    bool lead = true;
    for (const auto& b : s.banks) {
      std::string equity = b.equity_book().to_string();
      if (b.equity_mbs_face.is_positive()) {
        equity += " (" + b.equity_mbs_face.to_string() + " MBS)";
      }
      os << b.id << " | " << b.deposits.to_string() << " | " << b.loans.to_string() << " | " << b.cash.to_string()
         << " | " << equity << " | ";
      if (lead) {
        os << s.money_supply.to_string() << " | " << s.total_debt().to_string();
      } else {
        os << " | ";
      }
      os << '\n';
      lead = false;
    }
    if (s.external_mbs.is_positive() || s.retained_mbs.is_positive() || s.equity_mbs.is_positive()) {
      os << "MBS: external " << s.external_mbs.to_string() << ", bank-retained " << s.retained_mbs.to_string()
         << ", in equity " << s.equity_mbs.to_string() << '\n';
    }
  }
  if (series.failure) os << "\nFAILED: " << *series.failure << '\n';
}

// ---- external series ----------------------------------------------------------------

std::map<std::string, ExternalSeries> read_external_csv(std::string_view text, const std::vector<std::string>& required) {
  std::string body;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line.front() == '#') continue;
    body += line;
    body += '\n';
  }
  auto rows = parse_csv_rows(body);
  if (rows.empty()) throw ParseError("external CSV is empty");
  const auto& header = rows.front();
  if (header.size() < 2) throw ParseError("external CSV needs a period column and at least one series");

  for (const auto& name : required) {
    if (std::find(header.begin() + 1, header.end(), name) == header.end()) {
      throw ParseError("external CSV has no column '" + name + "'");
    }
  }

  std::vector<std::string> periods;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) throw ParseError("external CSV row " + std::to_string(r) + " has wrong width");
    periods.push_back(rows[r][0]);
  }
  bool numeric = std::all_of(periods.begin(), periods.end(), [](const std::string& p) { return parse_double(p).has_value(); });
  for (std::size_t i = 1; i < periods.size(); ++i) {
    bool increasing = numeric ? *parse_double(periods[i - 1]) < *parse_double(periods[i]) : periods[i - 1] < periods[i];
    if (!increasing) throw ParseError("periods are not strictly increasing at '" + periods[i] + "'");
  }

  std::map<std::string, ExternalSeries> out;
  for (std::size_t c = 1; c < header.size(); ++c) {
    ExternalSeries s{header[c], {}};
    bool ok = true;
    for (std::size_t r = 1; r < rows.size() && ok; ++r) {
      auto v = parse_double(rows[r][c]);
      if (!v) {
        ok = false;
        break;
      }
      s.points.push_back({periods[r - 1], *v});
    }
    bool needed = std::find(required.begin(), required.end(), header[c]) != required.end();
    if (!ok) {
      if (needed) throw ParseError("column '" + header[c] + "' has non-numeric values");
      continue;
    }
    out.emplace(header[c], std::move(s));
  }
  return out;
}

ExternalSeries ratio_report(const ExternalSeries& a, const ExternalSeries& b) {
  std::map<std::string, double> denom;
  for (const auto& p : b.points) denom.emplace(p.period, p.value);
  ExternalSeries out{a.label + "/" + b.label, {}};
  for (const auto& p : a.points) {
    auto it = denom.find(p.period);
    if (it == denom.end()) continue;
    if (it->second == 0.0) throw std::domain_error("series '" + b.label + "' is zero at period " + p.period);
    out.points.push_back({p.period, p.value / it->second});
  }
  if (out.points.empty()) throw std::domain_error("series '" + a.label + "' and '" + b.label + "' share no periods");
  return out;
}

void write_external_csv(std::ostream& os, const ExternalSeries& series) {
  os << "period," << csv_escape(series.label) << '\n';
  for (const auto& p : series.points) os << csv_escape(p.period) << ',' << fmt::format("{:.10g}", p.value) << '\n';
}

} // namespace reservesim
