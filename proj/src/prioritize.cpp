#include "stprio/prioritize.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stprio {

namespace {

using nlohmann::json;

constexpr int kMaxEnumTests = 12;
constexpr int kMaxEnumMods = 16;
constexpr std::int64_t kNodeBudget = 2'000'000;

void check_tests(const std::vector<TestTraceData>& tests, bool need_duration) {
    std::size_t universe = tests.empty() ? 0 : tests.front().counts.size();
    for (const TestTraceData& t : tests) {
        if (t.counts.size() != universe || t.first_visit.size() != universe) {
            fail(ErrorCode::TraceDbMismatch,
                 "trace for test '" + t.id + "' covers a different trace-point range");
        }
        if (need_duration && t.duration_ms <= 0) {
            fail(ErrorCode::ZeroDuration, "test '" + t.id + "' has no recorded duration");
        }
    }
}

std::int64_t mod_visits(const TestTraceData& t, const std::set<int>& mod_tps) {
    std::int64_t total = 0;
    for (int tp : mod_tps) {
        if (tp >= 0 && static_cast<std::size_t>(tp) < t.counts.size()) total += t.counts[static_cast<std::size_t>(tp)];
    }
    return total;
}

std::set<int> covered_mods(const TestTraceData& t, const std::set<int>& mod_tps) {
    std::set<int> out;
    for (int tp : mod_tps) {
        if (tp >= 0 && static_cast<std::size_t>(tp) < t.counts.size() &&
            t.counts[static_cast<std::size_t>(tp)] > 0) {
            out.insert(tp);
        }
    }
    return out;
}

} // namespace

PrioritizedPlan prioritize_simple(const std::vector<TestTraceData>& tests,
                                  const std::set<int>& mod_tps) {
    check_tests(tests, false);
    PrioritizedPlan plan;
    plan.strategy = "simple";
    std::vector<PlanEntry> low;
    for (const TestTraceData& t : tests) {
        PlanEntry e;
        e.id = t.id;
        if (mod_visits(t, mod_tps) > 0) {
            e.group = "high";
            plan.order.push_back(std::move(e));
        } else {
            e.group = "low";
            low.push_back(std::move(e));
        }
    }
    plan.order.insert(plan.order.end(), std::make_move_iterator(low.begin()),
                      std::make_move_iterator(low.end()));
    return plan;
}

PrioritizedPlan prioritize_intensity(const std::vector<TestTraceData>& tests,
                                     const std::set<int>& mod_tps) {
    check_tests(tests, true);
    PrioritizedPlan plan;
    plan.strategy = "intensity";
    struct Row {
        PlanEntry entry;
        double p_it;
        std::int64_t duration;
        std::size_t original;
    };
    std::vector<Row> high;
    std::vector<PlanEntry> low;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const TestTraceData& t = tests[i];
        std::int64_t visits = mod_visits(t, mod_tps);
        // traversals per second; exact milliseconds before the division
        double p_it = static_cast<double>(visits) * 1000.0 / static_cast<double>(t.duration_ms);
        PlanEntry e;
        e.id = t.id;
        e.p_it = p_it;
        if (visits > 0) {
            e.group = "high";
            high.push_back(Row{std::move(e), p_it, t.duration_ms, i});
        } else {
            e.group = "low";
            low.push_back(std::move(e));
        }
    }
    std::stable_sort(high.begin(), high.end(), [](const Row& a, const Row& b) {
        if (a.p_it != b.p_it) return a.p_it > b.p_it;
        if (a.duration != b.duration) return a.duration < b.duration;
        return a.original < b.original;
    });
    for (Row& r : high) plan.order.push_back(std::move(r.entry));
    plan.order.insert(plan.order.end(), std::make_move_iterator(low.begin()),
                      std::make_move_iterator(low.end()));
    return plan;
}

namespace {

struct MttcSearch {
    const std::vector<TestTraceData>& tests;
    const std::vector<std::size_t>& traversing; // indices into tests
    const std::vector<std::set<int>>& coverage; // parallel to traversing
    std::set<int> target;

    MttcSearch(const std::vector<TestTraceData>& tests_,
               const std::vector<std::size_t>& traversing_,
               const std::vector<std::set<int>>& coverage_, std::set<int> target_)
        : tests(tests_), traversing(traversing_), coverage(coverage_),
          target(std::move(target_)) {}

    std::int64_t best_cover = std::numeric_limits<std::int64_t>::max();
    std::vector<std::size_t> best_seq; // positions within `traversing`
    std::vector<std::size_t> seq;
    std::vector<bool> used;
    std::int64_t nodes = 0;
    bool exploded = false;

    std::int64_t final_cover_time(std::int64_t dur_sum, std::size_t pos,
                                  const std::set<int>& covered_before) const {
        std::int64_t worst = 0;
        const TestTraceData& t = tests[traversing[pos]];
        for (int tp : target) {
            if (covered_before.count(tp)) continue;
            std::int64_t first = t.first_visit[static_cast<std::size_t>(tp)];
            if (first >= 0) worst = std::max(worst, first);
        }
        return dur_sum + worst;
    }

    // smaller cover time, then fewer tests, then earliest original indices
    void consider(std::int64_t cover) {
        if (std::make_tuple(cover, seq.size(), seq) <
            std::make_tuple(best_cover, best_seq.size(), best_seq)) {
            best_cover = cover;
            best_seq = seq;
        }
    }

    void dfs(const std::set<int>& covered, std::int64_t dur_sum) {
        if (exploded) return;
        if (++nodes > kNodeBudget) {
            exploded = true;
            return;
        }
        for (std::size_t pos = 0; pos < traversing.size(); ++pos) {
            if (used[pos]) continue;
            const std::set<int>& cov = coverage[pos];
            bool adds = false;
            for (int tp : cov) {
                if (!covered.count(tp)) {
                    adds = true;
                    break;
                }
            }
            if (!adds) continue;
            std::set<int> merged = covered;
            merged.insert(cov.begin(), cov.end());
            bool complete = true;
            for (int tp : target) {
                if (!merged.count(tp)) {
                    complete = false;
                    break;
                }
            }
            seq.push_back(pos);
            if (complete) {
                consider(final_cover_time(dur_sum, pos, covered));
            } else {
                std::int64_t next_sum = dur_sum + tests[traversing[pos]].duration_ms;
                if (next_sum <= best_cover) {
                    used[pos] = true;
                    dfs(merged, next_sum);
                    used[pos] = false;
                }
            }
            seq.pop_back();
        }
    }
};

} // namespace

PrioritizedPlan prioritize_mttc(const std::vector<TestTraceData>& tests,
                                const std::set<int>& mod_tps) {
    check_tests(tests, true);
    PrioritizedPlan plan;
    plan.strategy = "mttc";

    std::vector<std::size_t> remaining;
    std::vector<std::set<int>> remaining_cov;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        std::set<int> cov = covered_mods(tests[i], mod_tps);
        if (!cov.empty()) {
            remaining.push_back(i);
            remaining_cov.push_back(std::move(cov));
        }
    }

    bool force_greedy = remaining.size() > kMaxEnumTests ||
                        mod_tps.size() > static_cast<std::size_t>(kMaxEnumMods);

    std::set<std::size_t> selected;
    int round = 0;
    while (selected.size() < remaining.size()) {
        ++round;
        std::vector<std::size_t> pool;
        std::vector<std::set<int>> pool_cov;
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            if (!selected.count(k)) {
                pool.push_back(remaining[k]);
                pool_cov.push_back(remaining_cov[k]);
            }
        }
        std::set<int> target;
        for (const std::set<int>& cov : pool_cov) target.insert(cov.begin(), cov.end());

        std::vector<std::size_t> chosen_positions; // positions within pool
        std::int64_t chosen_cover = 0;
        bool used_greedy = force_greedy;
        if (!force_greedy) {
            MttcSearch search{tests, pool, pool_cov, target};
            search.used.assign(pool.size(), false);
            search.dfs({}, 0);
            if (search.exploded) {
                used_greedy = true;
            } else {
                chosen_positions = search.best_seq;
                chosen_cover = search.best_cover;
            }
        }
        if (used_greedy) {
            plan.heuristic = true;
            std::set<int> covered;
            std::set<std::size_t> taken;
            std::int64_t dur_sum = 0;
            std::int64_t cover = 0;
            while (covered.size() < target.size()) {
                std::size_t best_pos = pool.size();
                double best_score = -1.0;
                std::int64_t best_new = 0;
                for (std::size_t pos = 0; pos < pool.size(); ++pos) {
                    if (taken.count(pos)) continue;
                    std::int64_t newly = 0;
                    for (int tp : pool_cov[pos]) {
                        if (!covered.count(tp)) ++newly;
                    }
                    if (newly == 0) continue;
                    double score = static_cast<double>(newly) /
                                   static_cast<double>(tests[pool[pos]].duration_ms);
                    if (score > best_score ||
                        (score == best_score && newly > best_new)) {
                        best_score = score;
                        best_new = newly;
                        best_pos = pos;
                    }
                }
                if (best_pos == pool.size()) break;
                taken.insert(best_pos);
                std::set<int> before = covered;
                covered.insert(pool_cov[best_pos].begin(), pool_cov[best_pos].end());
                bool complete = covered.size() == target.size();
                if (complete) {
                    std::int64_t worst = 0;
                    const TestTraceData& t = tests[pool[best_pos]];
                    for (int tp : target) {
                        if (before.count(tp)) continue;
                        std::int64_t first = t.first_visit[static_cast<std::size_t>(tp)];
                        if (first >= 0) worst = std::max(worst, first);
                    }
                    cover = dur_sum + worst;
                } else {
                    dur_sum += tests[pool[best_pos]].duration_ms;
                }
                chosen_positions.push_back(best_pos);
            }
            chosen_cover = cover;
        }

        if (chosen_positions.empty()) break;

        Mttc mttc;
        mttc.cover_time_ms = chosen_cover;
        std::set<int> covered;
        for (std::size_t pos : chosen_positions) {
            mttc.tests.push_back(tests[pool[pos]].id);
            covered.insert(pool_cov[pos].begin(), pool_cov[pos].end());
            for (std::size_t k = 0; k < remaining.size(); ++k) {
                if (remaining[k] == pool[pos]) selected.insert(k);
            }
            PlanEntry e;
            e.id = tests[pool[pos]].id;
            e.group = "high";
            e.mttc_index = round;
            e.cover_time_ms = chosen_cover;
            plan.order.push_back(std::move(e));
        }
        mttc.covered.assign(covered.begin(), covered.end());
        plan.mttcs.push_back(std::move(mttc));
    }

    std::set<std::size_t> traversing_set(remaining.begin(), remaining.end());
    for (std::size_t i = 0; i < tests.size(); ++i) {
        if (traversing_set.count(i)) continue;
        PlanEntry e;
        e.id = tests[i].id;
        e.group = "low";
        plan.order.push_back(std::move(e));
    }
    return plan;
}

std::string plan_to_json(const PrioritizedPlan& plan) {
    json doc;
    doc["strategy"] = plan.strategy;
    doc["heuristic"] = plan.heuristic;
    doc["version_id"] = checksum_to_hex(plan.version_id);
    json order = json::array();
    for (const PlanEntry& e : plan.order) {
        json je;
        je["id"] = e.id;
        je["group"] = e.group;
        if (e.p_it >= 0.0) je["p_it"] = std::round(e.p_it * 10000.0) / 10000.0;
        if (e.mttc_index >= 0) je["mttc_index"] = e.mttc_index;
        if (e.cover_time_ms >= 0) je["cover_time_ms"] = e.cover_time_ms;
        order.push_back(std::move(je));
    }
    doc["order"] = std::move(order);
    json mttcs = json::array();
    for (const Mttc& m : plan.mttcs) {
        json jm;
        jm["tests"] = m.tests;
        jm["cover_time_ms"] = m.cover_time_ms;
        jm["covered"] = m.covered;
        mttcs.push_back(std::move(jm));
    }
    doc["mttcs"] = std::move(mttcs);
    return doc.dump(2) + "\n";
}

std::string plan_to_table(const PrioritizedPlan& plan) {
    std::ostringstream os;
    os << "strategy: " << plan.strategy << (plan.heuristic ? " (heuristic)" : "") << "\n";
    os << "rank  test        group  details\n";
    int rank = 1;
    for (const PlanEntry& e : plan.order) {
        char buf[160];
        std::string details;
        if (e.p_it >= 0.0) {
            char p[48];
            std::snprintf(p, sizeof(p), "p_it=%.2f", e.p_it);
            details += p;
        }
        if (e.mttc_index >= 0) {
            char m[64];
            std::snprintf(m, sizeof(m), "mttc=%d cover=%lldms", e.mttc_index,
                          static_cast<long long>(e.cover_time_ms));
            if (!details.empty()) details += " ";
            details += m;
        }
        std::snprintf(buf, sizeof(buf), "%-5d %-11s %-6s %s\n", rank++, e.id.c_str(),
                      e.group.c_str(), details.c_str());
        os << buf;
    }
    return os.str();
}

} // namespace stprio
