// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Each criterion's runtime bound is part of its check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hid/cli.hpp"
#include "hid/evaluation.hpp"
#include "hid/headswap.hpp"

using namespace hid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PixelGrid gaussian_grid(std::mt19937_64& rng, int h, int w, int c) {
    std::normal_distribution<double> n(0.0, 1.0);
    PixelGrid g(h, w, c);
    for (double& v : g.values()) v = n(rng);
    return g;
}

double dot(const PixelGrid& a, const PixelGrid& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

double rel_l2(const PixelGrid& a, const PixelGrid& ref) {
    double n = 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a.values()[i] - ref.values()[i];
        n += e * e;
        d += ref.values()[i] * ref.values()[i];
    }
    return std::sqrt(n / d);
}

const NoisePredictor& predictor() {
    static const NoisePredictor pred = NoisePredictor::from_renders(enumerate_dataset());
    return pred;
}

/// Runs f(i) for i in [0, n) on all cores; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(n);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> jobs;
    for (unsigned k = 0; k < workers; ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k] {
            for (std::size_t i = k; i < n; i += workers) out[i] = f(i);
        }));
    }
    for (auto& j : jobs) j.get();
    return out;
}

Outcome cfg_identity() {
    std::mt19937_64 rng(101);
    int exact = 0;
    for (int i = 0; i < 100; ++i) {
        const PixelGrid u = gaussian_grid(rng, 32, 32, 3);
        const PixelGrid c = gaussian_grid(rng, 32, 32, 3);
        exact += cfg_combine(u, c, {1.0}) == c ? 1 : 0;
    }
    return {exact == 100, fmt("%d/100 pairs bit-exact", exact)};
}

Outcome orthogonality() {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PixelGrid h = gaussian_grid(rng, 32, 32, 3);
        const PixelGrid b = gaussian_grid(rng, 32, 32, 3);
        const PixelGrid o = orthogonal_component(h, b);
        worst = std::max(worst, std::abs(dot(o, b)) / std::sqrt(dot(o, o) * dot(b, b)));
    }
    return {worst < 1e-10, fmt("max normalized inner product %.3e (bound 1e-10)", worst)};
}

Outcome step_inverse() {
    std::mt19937_64 rng(103);
    const NoiseSchedule sched = make_schedule(50);
    std::uniform_int_distribution<int> pick(0, 49);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int t = pick(rng);
        const PixelGrid z = gaussian_grid(rng, 8, 8, 3);
        const PixelGrid e = gaussian_grid(rng, 8, 8, 3);
        const PixelGrid back = ddim_sample_step(ddim_invert_step(z, e, t, sched), e, t + 1, sched);
        for (std::size_t k = 0; k < z.size(); ++k) {
            worst = std::max(worst, std::abs(back.values()[k] - z.values()[k]));
        }
    }
    return {worst < 1e-10, fmt("max |error| %.3e over 1000 triples (bound 1e-10)", worst)};
}

Outcome round_trip() {
    std::vector<AvatarRender> renders;
    for (int i = 0; i < 10; ++i) {
        renders.push_back(render_avatar(AttributeSpec::from_ordinal(i * 32 + 3)));
    }
    const NoisePredictor pred = NoisePredictor::from_renders(renders);
    std::vector<double> worst;
    bool below_at_100 = false;
    for (int T : {50, 100, 200}) {
        const NoiseSchedule sched = make_schedule(T);
        double w = 0.0;
        for (const auto& r : renders) {
            const InversionTrajectory traj = invert_trajectory(r.image, Condition{}, sched, pred);
            const PixelGrid back = sample_from(traj.latents[static_cast<std::size_t>(T)], T,
                                               Condition{}, {1.0}, sched, pred);
            w = std::max(w, rel_l2(back, r.image));
        }
        worst.push_back(w);
        if (T == 100) below_at_100 = w < 0.02;
    }
    const bool monotone = worst[1] <= worst[0] && worst[2] <= worst[1];
    return {below_at_100 && monotone,
            fmt("worst relative L2 T=50 %.2e, T=100 %.2e, T=200 %.2e (bound 2%% at T=100, "
                "non-increasing)",
                worst[0], worst[1], worst[2])};
}

Outcome identity_swap() {
    std::mt19937_64 rng(105);
    const NoiseSchedule sched = make_schedule(50);
    SwapConfig cfg;
    cfg.w = 1.0;
    cfg.mask_cfg.w = 1.0;
    std::vector<int> ordinals;
    for (int i = 0; i < 10; ++i) ordinals.push_back(static_cast<int>(rng() % kAttributeCombinations));
    const auto ok = parallel_map<int>(10, [&](std::size_t i) {
        const AttributeSpec a = AttributeSpec::from_ordinal(ordinals[i]);
        const SwapResult res = run_headswap(a, a, cfg, sched, predictor());
        return res.mask.none() && res.output == render_avatar(a).image ? 1 : 0;
    });
    const int n = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    return {n == 10, fmt("%d/10 specs: empty mask and output bit-equal to body", n)};
}

Outcome outside_mask_exactness() {
    const NoiseSchedule sched = make_schedule(50);
    const SwapConfig cfg;
    const auto pairs = sample_pairs(25, 25);
    const auto ok = parallel_map<int>(pairs.size(), [&](std::size_t i) {
        const auto& [body, head] = pairs[i];
        const SwapResult res = run_headswap(body, head, cfg, sched, predictor());
        const PixelGrid ib = render_avatar(body).image;
        for (int r = 0; r < ib.height(); ++r) {
            for (int c = 0; c < ib.width(); ++c) {
                for (int ch = 0; ch < ib.channels(); ++ch) {
                    // {M = 0} exactness and changed-set containment are the same per-pixel test.
                    if (!res.mask.at(r, c) && res.output.at(r, c, ch) != ib.at(r, c, ch)) return 0;
                }
            }
        }
        return 1;
    });
    const int n = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    return {n == 25, fmt("%d/25 pairs with max|I_o - I_b| = 0 on {M = 0}", n)};
}

// Shared state for the 50-pair criteria.
struct PairRun {
    double iou_full = 0.0;
    double iou_naive = 0.0;
    double mse_out = 0.0;
    double mse_body = 0.0;
    int probe[3] = {0, 0, 0};  // full variant at w = 1, 3, 7.5
    double hair_cover = -1.0;  // only for long -> bald pairs
};

constexpr std::uint64_t kAblationSeed = 7;
constexpr double kSweep[3] = {1.0, 3.0, 7.5};

const std::vector<PairRun>& ablation_runs() {
    static const std::vector<PairRun> runs = [] {
        const NoiseSchedule sched = make_schedule(50);
        const auto pairs = sample_pairs(kAblationSeed, 50);
        return parallel_map<PairRun>(pairs.size(), [&](std::size_t i) {
            const auto& [body, head] = pairs[i];
            const BinaryMask gt = ground_truth_edit_mask(body, head);
            const AvatarRender oracle = oracle_swap(body, head);
            const AvatarRender br = render_avatar(body);
            const BinaryMask all(gt.height(), gt.width(), true);
            PairRun pr;
            SwapConfig cfg;
            cfg.mask_cfg.variant = MaskVariant::Naive;
            pr.iou_naive = mask_iou(run_headswap(body, head, cfg, sched, predictor()).mask, gt);
            for (int k = 0; k < 3; ++k) {
                SwapConfig sc;
                sc.w = kSweep[k];
                sc.mask_cfg.w = kSweep[k];
                const SwapResult res = run_headswap(body, head, sc, sched, predictor());
                pr.probe[k] = attribute_probe(res.output, body, head).matched;
                if (kSweep[k] != SwapConfig{}.w) continue;
                pr.iou_full = mask_iou(res.mask, gt);
                pr.mse_out = region_mse(res.output, oracle.image, all);
                pr.mse_body = region_mse(br.image, oracle.image, all);
                if (body.hair_style == HairStyle::Long && head.hair_style == HairStyle::Bald) {
                    pr.hair_cover = static_cast<double>((res.mask & br.hair_mask).count()) /
                                    static_cast<double>(br.hair_mask.count());
                }
            }
            return pr;
        });
    }();
    return runs;
}

Outcome ablation() {
    const auto& runs = ablation_runs();
    double full = 0.0;
    double naive = 0.0;
    int wins = 0;
    int losses = 0;
    for (const auto& r : runs) {
        full += r.iou_full;
        naive += r.iou_naive;
        wins += r.iou_full > r.iou_naive ? 1 : 0;
        losses += r.iou_full < r.iou_naive ? 1 : 0;
    }
    full /= static_cast<double>(runs.size());
    naive /= static_cast<double>(runs.size());
    const double share = static_cast<double>(wins) / static_cast<double>(runs.size());
    return {full >= naive && share >= 0.6,
            fmt("mean IoU full %.4f vs naive %.4f; full wins %d/50 (%.0f%%, need 60%%), "
                "loses %d, ties %d",
                full, naive, wins, 100 * share, losses, 50 - wins - losses)};
}

Outcome efficacy() {
    const auto& runs = ablation_runs();
    int better = 0;
    int probe_ok[3] = {0, 0, 0};
    for (const auto& r : runs) {
        better += r.mse_out < r.mse_body ? 1 : 0;
        for (int k = 0; k < 3; ++k) probe_ok[k] += r.probe[k] >= 2 ? 1 : 0;
    }
    const int best = *std::max_element(probe_ok, probe_ok + 3);
    return {better >= 40 && best >= 35,
            fmt("MSE improved on %d/50 (need 40); probe >= 2/3 on %d/%d/%d of 50 at w = 1/3/7.5 "
                "(need 35 for one w)",
                better, probe_ok[0], probe_ok[1], probe_ok[2])};
}

std::vector<std::pair<std::string, std::string>> tree_bytes(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().filename() == "summary.json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files.emplace_back(fs::relative(e.path(), root).string(), ss.str());
    }
    std::sort(files.begin(), files.end());
    return files;
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "hid_acceptance_determinism";
    fs::remove_all(base);
    std::ostringstream sink;
    for (const char* run : {"a", "b"}) {
        const int code = cli_main({"ablate", "--pairs", "5", "--seed", "7", "--out",
                                   (base / run).string()},
                                  sink, sink);
        if (code != kExitOk) return {false, fmt("ablate exited with %d: %s", code, sink.str().c_str())};
    }
    const auto a = tree_bytes(base / "a");
    const auto b = tree_bytes(base / "b");
    const bool has_metrics = std::any_of(a.begin(), a.end(),
                                         [](const auto& f) { return f.first == "metrics.jsonl"; });
    const bool same = a == b && has_metrics;
    fs::remove_all(base);
    return {same, fmt("%zu files compared (metrics.jsonl and images), %s", a.size(),
                      same ? "byte-identical" : "differ")};
}

Outcome long_hair_removal() {
    const auto& runs = ablation_runs();
    int n = 0;
    int ok = 0;
    double worst = 1.0;
    for (const auto& r : runs) {
        if (r.hair_cover < 0.0) continue;
        ++n;
        ok += r.hair_cover >= 0.5 ? 1 : 0;
        worst = std::min(worst, r.hair_cover);
    }
    return {n > 0 && ok == n,
            fmt("%d/%d long-to-bald pairs with mask covering >= 50%% of body hair (worst %.2f)", ok,
                n, n > 0 ? worst : 0.0)};
}

}  // namespace

int main() {
    // Criteria 7, 8 and 10 share one 50-pair run; 7's budget covers it.
    const std::vector<Criterion> criteria = {
        {1, "CFG identity", 1.0, cfg_identity},
        {2, "orthogonality", 1.0, orthogonality},
        {3, "step inverse", 1.0, step_inverse},
        {4, "round-trip reconstruction", 30.0, round_trip},
        {5, "identity swap", 10.0, identity_swap},
        {6, "outside-mask exactness", 60.0, outside_mask_exactness},
        {7, "ablation full vs naive", 300.0, ablation},
        {8, "end-to-end efficacy", 300.0, efficacy},
        {9, "determinism", 60.0, determinism},
        {10, "long-hair removal", 300.0, long_hair_removal},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  criterion %2d  %-26s %s [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
