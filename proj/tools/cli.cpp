#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ringcirc/circuit.hpp"
#include "ringcirc/compile.hpp"
#include "ringcirc/io.hpp"
#include "ringcirc/logic.hpp"
#include "ringcirc/numeric.hpp"
#include "ringcirc/sexpr.hpp"
#include "ringcirc/simulate.hpp"

namespace ringcirc::cli {

using nlohmann::json;

namespace {

struct FormulaSource {
  std::string path;
  std::string text;

  void attach(CLI::App* sub) {
    auto* f = sub->add_option("--formula", path, "Formula file")->check(CLI::ExistingFile);
    auto* e = sub->add_option("--expr", text, "Formula text");
    f->excludes(e);
  }
  FormulaPtr load() const {
    if (path.empty() && text.empty()) throw Error("usage", "one of --formula or --expr is required");
    return parse_formula(path.empty() ? text : read_file(path));
  }
};

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& content) {
  if (path)
    write_file(*path, content);
  else
    out << content;
}

std::vector<std::string> split_values(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    std::size_t start = 0;
    while (start <= t.size()) {
      auto comma = t.find_first_of(", \t", start);
      if (comma == std::string::npos) comma = t.size();
      auto piece = t.substr(start, comma - start);
      if (!piece.empty()) out.push_back(piece);
      start = comma + 1;
    }
  }
  return out;
}

std::vector<Value> parse_inputs(const Domain& d, const std::vector<std::string>& tokens) {
  std::vector<Value> vs;
  for (const auto& t : split_values(tokens)) vs.push_back(parse_value(d, t));
  return vs;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  auto number = [&](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      throw Error("usage", "bad size list \"" + text + "\"");
    return static_cast<std::size_t>(std::stoull(s));
  };
  auto range = text.find("..");
  if (range != std::string::npos) {
    std::size_t lo = number(text.substr(0, range)), hi = number(text.substr(range + 2));
    if (lo > hi) throw Error("usage", "empty size range \"" + text + "\"");
    for (std::size_t n = lo; n <= hi; ++n) sizes.push_back(n);
  } else {
    for (const auto& s : split_values({text})) sizes.push_back(number(s));
  }
  if (sizes.empty()) throw Error("usage", "bad size list \"" + text + "\"");
  return sizes;
}

std::vector<std::size_t> parse_digits(const std::string& text, std::size_t base) {
  std::vector<std::size_t> digits;
  if (text.find(',') != std::string::npos) {
    for (const auto& s : split_values({text})) digits.push_back(std::stoull(s));
  } else {
    for (char ch : text) {
      if (ch < '0' || ch > '9') throw Error("usage", "bad digit string \"" + text + "\"");
      digits.push_back(static_cast<std::size_t>(ch - '0'));
    }
  }
  if (digits.empty()) throw Error("usage", "empty digit string");
  for (auto d : digits)
    if (d >= base) throw Error("invalid_argument", "digit " + std::to_string(d) + " not below base " + std::to_string(base));
  return digits;
}

FanIn parse_fanin(const std::string& s) { return s == "bounded" ? FanIn::bounded : FanIn::unbounded; }

json stats_json(const std::vector<GfrStats>& stats) {
  json out = json::array();
  for (const auto& s : stats)
    out.push_back({{"symbol", s.symbol},
                   {"exponent", s.exponent},
                   {"calls", s.calls},
                   {"max_depth", s.max_depth},
                   {"max_counted_depth", s.max_counted_depth},
                   {"cap", s.cap}});
  return out;
}

Circuit to_normal_form(const Circuit& c, std::optional<std::size_t> cfac, std::size_t exponent,
                       NormalFormParams* used = nullptr) {
  Circuit balanced = is_balanced(c) ? c.unlabeled() : balance(c);
  NormalFormParams p{cfac.value_or(minimal_cfac(balanced, exponent)), exponent};
  if (used) *used = p;
  return pad_and_number(balanced, p);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact circuits and recursion formulas over ordered rings", "ringcirc"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Seed for randomized checks")->envname("RINGCIRC_SEED");

  // eval-circuit
  auto* ec = app.add_subcommand("eval-circuit", "Evaluate a circuit on inputs");
  std::string ec_circuit;
  std::vector<std::string> ec_inputs;
  ec->add_option("--circuit", ec_circuit)->required()->check(CLI::ExistingFile);
  ec->add_option("--inputs", ec_inputs, "Input values (space or comma separated)");

  // eval-formula
  auto* ef = app.add_subcommand("eval-formula", "Evaluate a sentence on a structure");
  FormulaSource ef_formula;
  std::string ef_structure;
  std::vector<std::string> ef_inputs;
  bool ef_stats = false, ef_no_cap = false;
  ef_formula.attach(ef);
  ef->add_option("--structure", ef_structure)->required()->check(CLI::ExistingFile);
  ef->add_option("--inputs", ef_inputs, "Values of the input function f_element");
  ef->add_flag("--stats", ef_stats, "Print a JSON report with recursion depths");
  ef->add_flag("--no-cap", ef_no_cap, "Do not enforce the recursion depth cap");

  // compile
  auto* co = app.add_subcommand("compile", "Compile a sentence to a circuit");
  FormulaSource co_formula;
  std::optional<std::size_t> co_size;
  std::string co_domain = "Z", co_fanin = "unbounded", co_structure;
  std::optional<std::string> co_out;
  co_formula.attach(co);
  co->add_option("--size", co_size, "Universe size (number of inputs)");
  co->add_option("--domain", co_domain);
  co->add_option("--structure", co_structure, "Structure holding the other symbols")->check(CLI::ExistingFile);
  co->add_option("--fanin", co_fanin)->check(CLI::IsMember({"bounded", "unbounded"}));
  co->add_option("--out", co_out);

  // to-gfr
  auto* tg = app.add_subcommand("to-gfr", "Encode a circuit as a recursion sentence and structure");
  std::string tg_circuit, tg_out;
  std::optional<std::size_t> tg_cfac;
  std::size_t tg_exp = 1;
  bool tg_bounded = false;
  tg->add_option("--circuit", tg_circuit)->required()->check(CLI::ExistingFile);
  tg->add_option("--cfac", tg_cfac);
  tg->add_option("--exp", tg_exp)->required()->check(CLI::PositiveNumber);
  tg->add_flag("--bounded", tg_bounded, "Use bounded aggregators throughout");
  tg->add_option("--out", tg_out, "Writes OUT.sexp and OUT.structure.json")->required();

  // balance
  auto* ba = app.add_subcommand("balance", "Equalize path lengths with unary add chains");
  std::string ba_circuit;
  std::optional<std::string> ba_out;
  ba->add_option("--circuit", ba_circuit)->required()->check(CLI::ExistingFile);
  ba->add_option("--out", ba_out);

  // normalize
  auto* no = app.add_subcommand("normalize", "Balance, pad and number a circuit");
  std::string no_circuit;
  std::optional<std::size_t> no_cfac;
  std::size_t no_exp = 1;
  std::optional<std::string> no_out;
  no->add_option("--circuit", no_circuit)->required()->check(CLI::ExistingFile);
  no->add_option("--cfac", no_cfac);
  no->add_option("--exp", no_exp)->required()->check(CLI::PositiveNumber);
  no->add_option("--out", no_out);

  // lower
  auto* lo = app.add_subcommand("lower", "Simulate a circuit over a smaller domain");
  std::string lo_circuit, lo_to;
  std::optional<std::string> lo_from, lo_out;
  lo->add_option("--circuit", lo_circuit)->required()->check(CLI::ExistingFile);
  lo->add_option("--from", lo_from);
  lo->add_option("--to", lo_to)->required();
  lo->add_option("--out", lo_out);

  // check-sim
  auto* cs = app.add_subcommand("check-sim", "Check that a lowered circuit simulates its source");
  std::optional<std::string> cs_map, cs_report;
  std::string cs_src, cs_dst;
  std::size_t cs_samples = 200;
  long cs_range = 3;
  cs->add_option("--map", cs_map, "SOURCE->TARGET; inferred from the circuits when absent");
  cs->add_option("--src", cs_src)->required()->check(CLI::ExistingFile);
  cs->add_option("--dst", cs_dst)->required()->check(CLI::ExistingFile);
  cs->add_option("--samples", cs_samples);
  cs->add_option("--range", cs_range, "Sampled magnitudes")->check(CLI::PositiveNumber);
  cs->add_option("--report", cs_report);

  // seq-d
  auto* sd = app.add_subcommand("seq-d", "Print the depth-encoding sequence d(n, c, i)");
  std::size_t sd_n = 0, sd_c = 0, sd_i = 0;
  sd->add_option("--n", sd_n)->required();
  sd->add_option("--c", sd_c)->required();
  sd->add_option("--i", sd_i)->required();

  // countdown
  auto* cd = app.add_subcommand("countdown", "Print the digit-halving countdown");
  std::size_t cd_base = 0;
  std::string cd_start;
  cd->add_option("--base", cd_base)->required();
  cd->add_option("--start", cd_start, "Digits, e.g. 444 or 4,4,4")->required();

  // roundtrip
  auto* rt = app.add_subcommand("roundtrip", "Compare compiled circuits with formula evaluation");
  FormulaSource rt_formula;
  std::string rt_sizes = "2..4", rt_domain = "Z", rt_fanin = "unbounded";
  std::size_t rt_samples = 50;
  long rt_range = 3;
  rt_formula.attach(rt);
  rt->add_option("--sizes", rt_sizes, "LO..HI or a comma list");
  rt->add_option("--samples", rt_samples);
  rt->add_option("--domain", rt_domain);
  rt->add_option("--fanin", rt_fanin)->check(CLI::IsMember({"bounded", "unbounded"}));
  rt->add_option("--range", rt_range)->check(CLI::PositiveNumber);

  // export-dot
  auto* ed = app.add_subcommand("export-dot", "Write a circuit as a Graphviz graph");
  std::string ed_circuit;
  std::optional<std::string> ed_out;
  ed->add_option("--circuit", ed_circuit)->required()->check(CLI::ExistingFile);
  ed->add_option("--out", ed_out);

  auto fail = [&](const std::string& code, const std::string& message) {
    err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
    return kError;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    Rng rng(seed);
    if (ec->parsed()) {
      Circuit c = circuit_from_json(read_file(ec_circuit));
      auto outs = evaluate(c, parse_inputs(c.domain(), ec_inputs));
      for (std::size_t k = 0; k < outs.size(); ++k) out << (k ? " " : "") << to_string(outs[k]);
      out << "\n";
    } else if (ef->parsed()) {
      FormulaPtr f = ef_formula.load();
      Structure s = structure_from_json(read_file(ef_structure));
      if (!ef_inputs.empty()) s = with_input(s, parse_inputs(s.domain(), ef_inputs));
      std::vector<GfrStats> stats;
      EvalOptions opts;
      opts.enforce_depth_cap = !ef_no_cap;
      bool v = eval_formula(s, f, {}, opts, &stats);
      if (ef_stats)
        out << json{{"value", v}, {"universe", s.universe()}, {"recursion", stats_json(stats)}}.dump(2) << "\n";
      else
        out << (v ? "true" : "false") << "\n";
    } else if (co->parsed()) {
      FormulaPtr f = co_formula.load();
      std::optional<Structure> arb;
      if (!co_structure.empty()) {
        arb = structure_from_json(read_file(co_structure));
        if (co_size && *co_size != arb->universe())
          throw Error("usage", "--size disagrees with the structure's universe");
      } else {
        if (!co_size) throw Error("usage", "one of --size or --structure is required");
        arb.emplace(Domain::parse(co_domain), *co_size);
      }
      CompileOptions opts;
      opts.fanin = parse_fanin(co_fanin);
      auto compiled = compile_formula(f, *arb, opts);
      emit(out, co_out, circuit_to_json(compiled.circuit));
    } else if (tg->parsed()) {
      Circuit c = circuit_from_json(read_file(tg_circuit));
      NormalFormParams p;
      if (c.label_base() == 0) {
        c = to_normal_form(c, tg_cfac, tg_exp, &p);
      } else {
        if (!tg_cfac) throw Error("usage", "--cfac is required for an already numbered circuit");
        p = NormalFormParams{*tg_cfac, tg_exp};
      }
      check_normal_form(c, p);
      auto enc = circuit_to_gfr(c, p, tg_bounded);
      write_file(tg_out + ".sexp", to_sexpr(enc.sentence) + "\n");
      write_file(tg_out + ".structure.json", structure_to_json(enc.description));
      out << json{{"cfac", p.cfac},
                  {"exponent", p.exponent},
                  {"depth", depth(c)},
                  {"gates", c.gates().size()},
                  {"label_length", enc.label_length},
                  {"sentence", tg_out + ".sexp"},
                  {"structure", tg_out + ".structure.json"}}
                 .dump(2)
          << "\n";
    } else if (ba->parsed()) {
      emit(out, ba_out, circuit_to_json(balance(circuit_from_json(read_file(ba_circuit)))));
    } else if (no->parsed()) {
      emit(out, no_out, circuit_to_json(to_normal_form(circuit_from_json(read_file(no_circuit)), no_cfac, no_exp)));
    } else if (lo->parsed()) {
      Circuit c = circuit_from_json(read_file(lo_circuit));
      if (lo_from && !(Domain::parse(*lo_from) == c.domain()))
        throw Error("domain_mismatch", "circuit is over " + c.domain().name() + ", not " + *lo_from);
      auto l = lower(c, Domain::parse(lo_to));
      emit(out, lo_out, circuit_to_json(l.circuit));
    } else if (cs->parsed()) {
      Circuit src = circuit_from_json(read_file(cs_src));
      Circuit dst = circuit_from_json(read_file(cs_dst));
      SimulationMap map = cs_map ? SimulationMap::parse(*cs_map) : SimulationMap::between(src.domain(), dst.domain());
      auto r = check_simulation(map, src, dst, cs_samples, rng, nullptr, cs_range);
      json report = {{"map", r.map},
                     {"seed", seed},
                     {"samples", r.samples},
                     {"commuting", r.commuting},
                     {"decisions_agree", r.decisions_agree},
                     {"injective_on_sample", r.injective},
                     {"source_size", r.source_size},
                     {"target_size", r.target_size},
                     {"source_depth", r.source_depth},
                     {"target_depth", r.target_depth},
                     {"size_factor", r.size_factor},
                     {"depth_factor", r.depth_factor},
                     {"passed", r.passed()}};
      if (r.first_failure) report["first_failure"] = *r.first_failure;
      std::string text = report.dump(2) + "\n";
      if (cs_report) write_file(*cs_report, text);
      out << text;
      return r.passed() ? kOk : kCheckFailed;
    } else if (sd->parsed()) {
      out << format_seq_d(seq_d(sd_n, sd_c, sd_i));
    } else if (cd->parsed()) {
      if (cd_base < 2) throw Error("invalid_argument", "base must be at least 2");
      out << format_countdown(digit_halving_countdown(cd_base, parse_digits(cd_start, cd_base)));
    } else if (rt->parsed()) {
      FormulaPtr f = rt_formula.load();
      Domain d = Domain::parse(rt_domain);
      CompileOptions opts;
      opts.fanin = parse_fanin(rt_fanin);
      auto r = roundtrip_check(f, parse_sizes(rt_sizes), rt_samples, [&](std::size_t n) { return Structure(d, n); }, rng,
                               opts, rt_range);
      json rows = json::array();
      for (const auto& row : r.rows)
        rows.push_back({{"size", row.size},
                        {"samples", row.samples},
                        {"agreements", row.agreements},
                        {"depth", row.depth},
                        {"gates", row.gates}});
      json bad = json::array();
      for (const auto& c : r.disagreements) {
        json inputs = json::array();
        for (const auto& v : c.inputs) inputs.push_back(to_string(v));
        bad.push_back({{"size", c.size},
                       {"inputs", inputs},
                       {"formula", c.formula},
                       {"circuit_output", to_string(c.circuit_output)},
                       {"localized", c.localized}});
      }
      out << json{{"seed", seed}, {"rows", rows}, {"disagreements", bad}, {"passed", r.all_agree()}}.dump(2) << "\n";
      return r.all_agree() ? kOk : kCheckFailed;
    } else if (ed->parsed()) {
      emit(out, ed_out, circuit_to_dot(circuit_from_json(read_file(ed_circuit))));
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return kOk;
}

}  // namespace ringcirc::cli
