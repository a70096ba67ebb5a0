#include "ape/ape.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "backend/batch.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace memaudit {

using nlohmann::json;

namespace {

constexpr int kMaxTokens = 256;

std::size_t cap_of(Backend& backend, const ApeConfig& config) {
  return config.max_in_flight ? config.max_in_flight : std::max<std::size_t>(1, backend.max_in_flight());
}

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

struct Slot {
  std::optional<GenerationResponse> response;
  ErrorCode code = ErrorCode::Internal;
  std::string error;
};

// Issues the prompts concurrently; slot i answers prompt i.
std::vector<Slot> generate_all(Backend& backend, const std::vector<GenerationRequest>& requests, std::size_t cap) {
  std::vector<Slot> slots(requests.size());
  parallel_for(requests.size(), cap, [&](std::size_t i) {
    try {
      slots[i].response = backend.generate(requests[i]);
    } catch (const Error& e) {
      slots[i].code = e.code();
      slots[i].error = e.what();
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });
  return slots;
}

// Draws prompts from make(attempt) until n distinct candidates exist or the
// attempt budget is spent.
template <typename MakeRequest, typename MakeCandidate>
std::vector<PromptCandidate> draw_unique(Backend& backend, std::size_t n, const ApeConfig& config, MakeRequest make,
                                         MakeCandidate to_candidate) {
  std::vector<PromptCandidate> out;
  std::unordered_set<std::string> seen;
  const std::size_t budget = n + config.dedup_retry_budget;
  std::size_t attempt = 0;
  while (out.size() < n && attempt < budget) {
    const std::size_t want = std::min(n - out.size(), budget - attempt);
    std::vector<GenerationRequest> requests;
    requests.reserve(want);
    for (std::size_t i = 0; i < want; ++i) requests.push_back(make(attempt + i));
    const auto slots = generate_all(backend, requests, cap_of(backend, config));
    for (std::size_t i = 0; i < want; ++i) {
      if (!slots[i].response || slots[i].response->finish_reason == FinishReason::Error) {
        const std::string why = slots[i].response ? "backend reported an error" : slots[i].error;
        throw ApeBackendError(slots[i].response ? ErrorCode::Generation : slots[i].code,
                              "candidate generation failed: " + why, std::move(out));
      }
      std::string text(trim(slots[i].response->text));
      const std::string key = normalize_whitespace(text);
      if (key.empty() || !seen.insert(key).second) continue;
      if (out.size() < n) out.push_back(to_candidate(std::move(text), attempt + i));
    }
    attempt += want;
  }
  return out;
}

bool better(const PromptCandidate& a, const PromptCandidate& b) {
  const double sa = a.score.value_or(-1.0), sb = b.score.value_or(-1.0);
  if (sa != sb) return sa > sb;
  if (a.generation != b.generation) return a.generation < b.generation;
  return a.instruction < b.instruction;
}

std::size_t target_field_count(FieldKind kind, bool full_record_match) {
  if (kind == FieldKind::Item && !full_record_match) return 1;
  return field_count(kind) - key_field_count(kind);
}

}  // namespace

DemoPair demo_from_line(std::string_view line, FieldKind kind) {
  auto [key, rest] = split_key(line, kind);
  return {std::move(key), std::move(rest)};
}

void ApeConfig::validate() const {
  if (top_k == 0 || top_k > n_candidates) throw Error(ErrorCode::Config, "APE needs 1 <= top_k <= n_candidates");
  if (n_iterations < 1) throw Error(ErrorCode::Config, "APE needs n_iterations >= 1");
  if (n_demos == 0) throw Error(ErrorCode::Config, "APE needs at least one demo");
  if (temperatures.empty()) throw Error(ErrorCode::Config, "APE needs at least one temperature");
  for (double t : temperatures) {
    if (!(t >= 0.0)) throw Error(ErrorCode::Config, "APE temperatures must be >= 0");
  }
  if (validation_size == 0 || probe_size == 0) throw Error(ErrorCode::Config, "APE validation and probe sizes must be > 0");
}

bool exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_whitespace(prediction) == normalize_whitespace(gold);
}

std::vector<PromptCandidate> propose_prompts(Backend& backend, std::span<const DemoPair> demos, std::size_t n,
                                             double temperature, std::uint64_t seed, const ApeConfig& config) {
  if (n == 0) return {};
  std::string query = config.proposal_meta_prompt + "\n\n";
  for (const auto& d : demos) query += "Input: " + d.input + "\nOutput: " + d.output + "\n\n";
  auto make = [&](std::size_t attempt) {
    GenerationRequest r;
    r.transcript = {{Role::User, query}};
    r.temperature = temperature;
    r.max_tokens = kMaxTokens;
    r.seed = derive_seed(seed, "propose/" + std::to_string(attempt));
    return r;
  };
  auto to_candidate = [&](std::string text, std::size_t) {
    PromptCandidate c;
    c.instruction = std::move(text);
    c.generation = 0;
    c.temperature = temperature;
    return c;
  };
  return draw_unique(backend, n, config, make, to_candidate);
}

std::string build_evaluation_query(std::string_view instruction, std::span<const DemoPair> demos,
                                   std::string_view key_prefix) {
  std::string q(instruction);
  q += "\n\n";
  for (const auto& d : demos) q += d.input + d.output + "\n";
  q += key_prefix;
  return q;
}

std::string extract_prediction(std::string_view completion, FieldKind kind, bool full_record_match) {
  const std::size_t nl = completion.find('\n');
  if (nl != std::string_view::npos) completion = completion.substr(0, nl);
  auto fields = split(completion, "::");
  const std::size_t keep = target_field_count(kind, full_record_match);
  if (fields.size() > keep) fields.resize(keep);
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += "::";
    out += fields[i];
  }
  return out;
}

std::string gold_target(std::string_view line, FieldKind kind, bool full_record_match) {
  return extract_prediction(split_key(line, kind).second, kind, full_record_match);
}

PromptEvaluation evaluate_prompt(Backend& backend, const PromptCandidate& candidate, std::span<const DemoPair> demos,
                                 std::span<const std::string> records, FieldKind kind, const ApeConfig& config) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "evaluate_prompt needs validation records");
  std::vector<GenerationRequest> requests;
  requests.reserve(records.size());
  for (const auto& line : records) {
    GenerationRequest r;
    r.transcript = {{Role::User, build_evaluation_query(candidate.instruction, demos, split_key(line, kind).first)}};
    r.temperature = 0.0;
    r.max_tokens = kMaxTokens;
    r.stop_sequences = {"\n"};
    requests.push_back(std::move(r));
  }
  const auto slots = generate_all(backend, requests, cap_of(backend, config));
  PromptEvaluation ev;
  ev.total = records.size();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].response || slots[i].response->finish_reason == FinishReason::Error) {
      ++ev.failures;
      ev.errors.push_back(records[i] + ": " + (slots[i].response ? "backend reported an error" : slots[i].error));
      continue;
    }
    const std::string pred = extract_prediction(slots[i].response->text, kind, config.full_record_match);
    if (exact_match(pred, gold_target(records[i], kind, config.full_record_match))) ++ev.matched;
  }
  ev.score = static_cast<double>(ev.matched) / static_cast<double>(ev.total);
  return ev;
}

std::vector<PromptCandidate> refine(Backend& backend, std::span<const PromptCandidate> top, std::size_t n,
                                    double temperature, std::uint64_t seed, const ApeConfig& config) {
  if (top.empty()) throw Error(ErrorCode::Config, "refine needs at least one top candidate");
  int generation = 0;
  for (const auto& c : top) generation = std::max(generation, c.generation);
  ++generation;
  if (n == 0) return {};
  auto make = [&](std::size_t attempt) {
    GenerationRequest r;
    r.transcript = {{Role::User, config.variation_meta_prompt + " " + top[attempt % top.size()].instruction}};
    r.temperature = temperature;
    r.max_tokens = kMaxTokens;
    r.seed = derive_seed(seed, "refine/" + std::to_string(attempt));
    return r;
  };
  auto to_candidate = [&](std::string text, std::size_t) {
    PromptCandidate c;
    c.instruction = std::move(text);
    c.generation = generation;
    c.temperature = temperature;
    return c;
  };
  return draw_unique(backend, n, config, make, to_candidate);
}

std::vector<PromptCandidate> select_top_k(std::span<const PromptCandidate> pool, std::size_t k) {
  std::vector<PromptCandidate> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end(), better);
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

CoverageReport run_ape(Backend& backend, const Dataset& dataset, const ApeConfig& config) {
  config.validate();
  const FieldKind kind = config.field_kind;
  std::vector<std::string> records = raw_lines(dataset, kind);
  if (records.size() < config.n_demos + 2) {
    throw Error(ErrorCode::Config, "APE needs at least n_demos + 2 records of kind " + std::string(to_string(kind)));
  }
  Rng rng(derive_seed(config.seed, "ape/sample"));
  rng.shuffle(records);

  const std::size_t rest = records.size() - config.n_demos;
  std::size_t n_val = config.validation_size, n_probe = config.probe_size;
  if (n_val + n_probe > rest) {
    n_val = std::clamp<std::size_t>(rest * config.validation_size / (config.validation_size + config.probe_size), 1,
                                    rest - 1);
    n_probe = rest - n_val;
  }
  std::vector<DemoPair> demos;
  for (std::size_t i = 0; i < config.n_demos; ++i) demos.push_back(demo_from_line(records[i], kind));
  const std::span<const std::string> all(records);
  const auto validation = all.subspan(config.n_demos, n_val);
  const auto probe = all.subspan(config.n_demos + n_val, n_probe);
  {
    const std::set<std::string> v(validation.begin(), validation.end());
    for (const auto& p : probe) {
      if (v.contains(p)) throw Error(ErrorCode::Internal, "validation and probe sets overlap");
    }
  }

  CoverageReport report;
  report.field_kind = kind;
  report.validation_size = n_val;
  report.probe_size = n_probe;
  bool stopped = false;
  for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
    const double t = config.temperatures[ti];
    TemperatureCoverage row;
    row.temperature = t;
    row.field_kind = kind;
    if (stopped) {
      row.error = "not run: an earlier temperature failed";
      report.rows.push_back(std::move(row));
      continue;
    }
    const std::uint64_t tseed = derive_seed(config.seed, "ape/t" + std::to_string(ti) + "/" + format_temperature(t));
    try {
      std::vector<PromptCandidate> pool;
      std::optional<PromptCandidate> best;
      for (int it = 0; it < config.n_iterations; ++it) {
        std::vector<PromptCandidate> batch =
            it == 0 ? propose_prompts(backend, demos, config.n_candidates, t, derive_seed(tseed, "propose"), config)
                    : refine(backend, select_top_k(pool, config.top_k), config.n_candidates, t,
                             derive_seed(tseed, "refine/" + std::to_string(it)), config);
        for (auto& c : batch) {
          const PromptEvaluation ev = evaluate_prompt(backend, c, demos, validation, kind, config);
          c.score = ev.score;
          c.matched = ev.matched;
          c.total = ev.total;
          report.state.push_back({t, it, c});
          if (!best || better(c, *best)) best = c;
          pool.push_back(std::move(c));
        }
        if (!best) throw Error(ErrorCode::Generation, "no candidate prompts were generated");
        row.best_history.push_back(*best->score);
      }
      const PromptEvaluation probe_ev = evaluate_prompt(backend, *best, demos, probe, kind, config);
      row.best_prompt = best->instruction;
      row.best_validation_score = *best->score;
      row.matched = probe_ev.matched;
      row.n_probed = probe_ev.total;
      row.coverage = probe_ev.score;
      row.completed = true;
    } catch (const Error& e) {
      row.error = e.what();
      stopped = true;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string state_to_jsonl(std::span<const ApeStateEntry> state) {
  std::string out;
  for (const auto& e : state) {
    json j{{"temperature", e.temperature},
           {"iteration", e.iteration},
           {"generation", e.candidate.generation},
           {"instruction", e.candidate.instruction},
           {"score", e.candidate.score ? json(*e.candidate.score) : json(nullptr)},
           {"matched", e.candidate.matched},
           {"total", e.candidate.total}};
    out += j.dump() + "\n";
  }
  return out;
}

json to_json(const CoverageReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"temperature", r.temperature},
                    {"field_kind", to_string(r.field_kind)},
                    {"coverage", r.coverage},
                    {"matched", r.matched},
                    {"n_probed", r.n_probed},
                    {"best_prompt", r.best_prompt},
                    {"best_validation_score", r.best_validation_score},
                    {"best_history", r.best_history},
                    {"completed", r.completed},
                    {"error", r.error}});
  }
  return {{"field_kind", to_string(report.field_kind)},
          {"validation_size", report.validation_size},
          {"probe_size", report.probe_size},
          {"rows", rows}};
}

std::optional<double> BaselineValues::get(FieldKind kind) const {
  switch (kind) {
    case FieldKind::Item: return item;
    case FieldKind::User: return user;
    case FieldKind::Rating: return rating;
  }
  return std::nullopt;
}

BaselineValues baseline_llama_1b() { return {"LLaMA-1B prior work", 0.0193, 0.1098, 0.0649}; }
BaselineValues baseline_llama_3b() { return {"LLaMA-3B prior work", 0.0268, 0.1326, 0.0622}; }

std::vector<ComparisonRow> baseline_compare(std::span<const CoverageReport> reports, const BaselineValues& baseline) {
  std::vector<ComparisonRow> out;
  for (const auto& report : reports) {
    for (const auto& r : report.rows) {
      if (!r.completed) continue;
      ComparisonRow row;
      row.temperature = r.temperature;
      row.field_kind = r.field_kind;
      row.coverage = r.coverage;
      row.baseline = baseline.get(r.field_kind);
      if (row.baseline) {
        row.delta = r.coverage - *row.baseline;
      } else {
        row.missing_baseline = true;
      }
      out.push_back(row);
    }
  }
  return out;
}

std::string render_coverage_table(std::span<const CoverageReport> reports, const BaselineValues* baseline) {
  const FieldKind kinds[] = {FieldKind::Item, FieldKind::User, FieldKind::Rating};
  std::vector<double> temps;
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      if (std::find(temps.begin(), temps.end(), r.temperature) == temps.end()) temps.push_back(r.temperature);
    }
  }
  std::sort(temps.begin(), temps.end());

  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return std::string(buf);
  };
  auto cell = [&](FieldKind k, double t) -> std::string {
    for (const auto& rep : reports) {
      for (const auto& r : rep.rows) {
        if (r.field_kind == k && r.temperature == t) return r.completed ? pct(r.coverage) : "n/a";
      }
    }
    return "";
  };

  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-24s %10s %10s %10s\n", "Temperature", "Item", "User", "Rating");
  out += line;
  for (double t : temps) {
    std::snprintf(line, sizeof line, "%-24s %10s %10s %10s\n", format_temperature(t).c_str(),
                  cell(kinds[0], t).c_str(), cell(kinds[1], t).c_str(), cell(kinds[2], t).c_str());
    out += line;
  }
  if (baseline) {
    auto b = [&](FieldKind k) { return baseline->get(k) ? pct(*baseline->get(k)) : std::string("n/a"); };
    std::snprintf(line, sizeof line, "%-24s %10s %10s %10s\n", baseline->name.c_str(), b(kinds[0]).c_str(),
                  b(kinds[1]).c_str(), b(kinds[2]).c_str());
    out += line;
  }
  return out;
}

}  // namespace memaudit
