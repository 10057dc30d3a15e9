#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "relsynth/synth.hpp"

namespace relsynth::synth {

const char* to_string(Failure::Reason r) { return r == Failure::Reason::Timeout ? "timeout" : "exhausted"; }

namespace {

struct Outcome {
  bool accepted = false;
  verify::CheckStats stats;
};

// Verifiers at growing relation bounds. Small bounds reject most wrong
// candidates cheaply; only the last one decides acceptance.
class Ladder {
 public:
  Ladder(const frontend::TypedProgram& prog, const verify::Bounds& b) {
    std::vector<int> sizes;
    for (int n : {1, 2, b.max_relation_size}) {
      n = std::min(n, b.max_relation_size);
      if (sizes.empty() || sizes.back() != n) sizes.push_back(n);
    }
    for (int n : sizes) {
      verify::Bounds step = b;
      step.max_relation_size = n;
      rungs_.push_back(std::make_unique<verify::Verifier>(prog, step));
    }
  }

  Outcome run(const Candidate& c) const {
    Outcome o;
    for (const auto& v : rungs_)
      if (!verify::is_valid(v->validate(c, &o.stats))) return o;
    o.accepted = true;
    return o;
  }

 private:
  std::vector<std::unique_ptr<verify::Verifier>> rungs_;
};

void check_batch(const Ladder& ladder, const std::vector<Candidate>& batch, std::vector<Outcome>& out, unsigned jobs) {
  out.assign(batch.size(), Outcome{});
  if (jobs <= 1 || batch.size() <= 1) {
    for (std::size_t k = 0; k < batch.size(); ++k) out[k] = ladder.run(batch[k]);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < batch.size();) out[k] = ladder.run(batch[k]);
  };
  std::vector<std::thread> pool;
  unsigned n = std::min<std::size_t>(jobs, batch.size());
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

Solution package(Candidate c, const SynthStats& stats) {
  Solution s;
  s.simplified = tor::simplify(c.post);
  auto q = emit::to_sql(s.simplified);
  if (!std::holds_alternative<emit::SqlQuery>(q)) q = emit::to_sql(c.post);
  s.sql = std::get<emit::SqlQuery>(q);
  s.sql_text = emit::render(s.sql);
  s.candidate = std::move(c);
  s.stats = stats;
  return s;
}

}  // namespace

SynthResult synthesize(const frontend::TypedProgram& prog, const SynthConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto expired = [&] {
    if (cfg.timeout_seconds <= 0) return false;
    return std::chrono::duration<double>(clock::now() - start).count() > cfg.timeout_seconds;
  };

  Ladder ladder(prog, cfg.bounds);
  CandidateStream stream(prog, extract_template(prog), cfg.cost_bound);
  const unsigned jobs = std::max(1u, cfg.jobs);
  const std::size_t batch_size = jobs == 1 ? 1 : 16 * static_cast<std::size_t>(jobs);

  SynthStats stats;
  std::vector<Candidate> batch;
  std::vector<Outcome> outcomes;
  for (;;) {
    if (expired()) return Failure{Failure::Reason::Timeout, stats};
    batch.clear();
    while (batch.size() < batch_size) {
      auto c = stream.next();
      if (!c) break;
      batch.push_back(std::move(*c));
    }
    if (batch.empty()) return Failure{Failure::Reason::Exhausted, stats};
    check_batch(ladder, batch, outcomes, jobs);
    // Account in enumeration order so the totals do not depend on `jobs`.
    for (std::size_t k = 0; k < batch.size(); ++k) {
      ++stats.candidates_tried;
      stats.vcs_checked += outcomes[k].stats.vcs;
      stats.instances += outcomes[k].stats.instances;
      if (outcomes[k].accepted) return package(std::move(batch[k]), stats);
      ++stats.candidates_rejected;
    }
  }
}

}  // namespace relsynth::synth
