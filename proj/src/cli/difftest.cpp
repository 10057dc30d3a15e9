#include <algorithm>
#include <random>
#include <thread>

#include "relsynth/cli.hpp"

namespace relsynth::cli {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

interp::Inputs generate_case(const frontend::TypedProgram& prog, std::uint64_t seed, std::uint64_t index,
                             const DiffOptions& opt) {
  // Case i is seeded with output i of the splitmix64 stream for `seed`.
  std::mt19937_64 eng(splitmix64(seed + index * kGamma));
  auto draw = [&](std::uint64_t n) { return static_cast<std::int64_t>(eng() % n); };
  auto text = [&] { return opt.alphabet[static_cast<std::size_t>(draw(opt.alphabet.size()))]; };
  const auto ints = static_cast<std::uint64_t>(opt.int_max) + 1;

  interp::Inputs in;
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& slot = prog.slots[static_cast<std::size_t>(p)];
    switch (slot.type) {
      case frontend::TypeKind::Relation: {
        Relation r{slot.schema, {}};
        auto n = draw(static_cast<std::uint64_t>(opt.max_relation_size) + 1);
        for (std::int64_t k = 0; k < n; ++k) {
          Row row;
          for (const auto& c : *slot.schema) {
            if (c.type == FieldType::Int) row.emplace_back(draw(ints));
            else row.emplace_back(text());
          }
          r.rows.push_back(std::move(row));
        }
        in.emplace(slot.name, std::move(r));
        break;
      }
      case frontend::TypeKind::Int: in.emplace(slot.name, draw(ints)); break;
      default: in.emplace(slot.name, text()); break;
    }
  }
  return in;
}

namespace {

std::optional<DiffFailure> run_case(const frontend::TypedProgram& prog, const emit::SqlQuery& sql, std::uint64_t seed,
                                    std::uint64_t index, const DiffOptions& opt) {
  DiffFailure f;
  f.index = index;
  f.inputs = generate_case(prog, seed, index, opt);
  try {
    f.expected = interp::run(prog, f.inputs);
    f.actual = emit::eval_sql(sql, emit::MiniDb::from_values(f.inputs), emit::params_from_values(f.inputs));
    if (*f.expected == *f.actual) return std::nullopt;
  } catch (const std::exception& e) {
    f.error = e.what();
  }
  return f;
}

}  // namespace

DiffResult difftest(const frontend::TypedProgram& prog, const emit::SqlQuery& sql, std::uint64_t cases,
                    std::uint64_t seed, const DiffOptions& opt) {
  DiffResult res;
  res.cases = cases;
  unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(std::max<std::uint64_t>(cases, 1))));
  // Each worker takes a strided share and keeps its own lowest failure.
  std::vector<DiffResult> parts(jobs);
  auto work = [&](unsigned w) {
    for (std::uint64_t i = w; i < cases; i += jobs) {
      auto f = run_case(prog, sql, seed, i, opt);
      if (!f) continue;
      ++parts[w].failures;
      if (!parts[w].first) parts[w].first = std::move(f);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& p : parts) {
    res.failures += p.failures;
    if (p.first && (!res.first || p.first->index < res.first->index)) res.first = std::move(p.first);
  }
  return res;
}

nlohmann::json diff_to_json(const frontend::TypedProgram& prog, const DiffResult& d, std::uint64_t seed) {
  nlohmann::json j{{"cases", d.cases}, {"seed", seed}, {"failures", d.failures}, {"firstFailure", nullptr}};
  if (d.first) {
    const auto& f = *d.first;
    j["firstFailure"] = {{"case", f.index},
                         {"input", interp::write_bindings(prog, f.inputs)},
                         {"interpreter", f.expected ? interp::value_to_json(*f.expected) : nlohmann::json()},
                         {"sql", f.actual ? interp::value_to_json(*f.actual) : nlohmann::json()},
                         {"error", f.error.empty() ? nlohmann::json() : nlohmann::json(f.error)}};
  }
  return j;
}

}  // namespace relsynth::cli
