#include "rough_llg/noise.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace rllg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// (0, 1], 53 bits
double to_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53; }

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t mode, std::uint64_t index) {
    std::uint64_t key = splitmix64(seed);
    key = splitmix64(key ^ std::rotl(mode + 1, 17));
    key = splitmix64(key ^ std::rotl(index + 1, 41));
    const double u1 = to_unit(splitmix64(key ^ 0x1ULL));
    const double u2 = to_unit(splitmix64(key ^ 0x2ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd BMSample::value(int i) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(q);
    for (int k = 0; k < i; ++k) v += increments[k];
    return v;
}

std::vector<Eigen::VectorXd> BMSample::path() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(increments.size() + 1);
    out.push_back(Eigen::VectorXd::Zero(q));
    for (const auto& d : increments) out.push_back(out.back() + d);
    return out;
}

BMSample sample_bm(std::uint64_t seed, const TimeGrid& grid, int q) {
    if (q < 1) throw std::invalid_argument("sample_bm: q must be >= 1");
    BMSample s{grid, q, seed, {}};
    const double sd = std::sqrt(grid.dt());
    s.increments.resize(grid.steps());
    for (int i = 0; i < grid.steps(); ++i) {
        Eigen::VectorXd d(q);
        for (int m = 0; m < q; ++m) d[m] = sd * counter_normal(seed, m, i);
        s.increments[i] = std::move(d);
    }
    return s;
}

void write_increments_csv(const BMSample& s, std::ostream& os) {
    os << "# rough-llg increments v1 seed=" << s.seed << " N=" << s.grid.steps() << " q=" << s.q
       << " T=" << std::setprecision(17) << s.grid.horizon() << "\n";
    for (const auto& d : s.increments) {
        for (int m = 0; m < s.q; ++m) os << (m ? "," : "") << std::setprecision(17) << d[m];
        os << "\n";
    }
}

BMSample read_increments_csv(std::istream& is) {
    std::string header;
    std::getline(is, header);
    if (header.rfind("# rough-llg increments v1", 0) != 0) throw std::runtime_error("increments csv: bad header");
    std::uint64_t seed = 0;
    int N = 0, q = 0;
    double T = 0.0;
    std::istringstream hs(header.substr(std::string("# rough-llg increments v1").size()));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "seed") seed = std::stoull(val);
        else if (key == "N") N = std::stoi(val);
        else if (key == "q") q = std::stoi(val);
        else if (key == "T") T = std::stod(val);
    }
    BMSample s{TimeGrid(T, N), q, seed, {}};
    std::string line;
    while (static_cast<int>(s.increments.size()) < N && std::getline(is, line)) {
        Eigen::VectorXd d(q);
        std::istringstream ls(line);
        for (int m = 0; m < q; ++m) {
            std::string cell;
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("increments csv: short row");
            d[m] = std::stod(cell);
        }
        s.increments.push_back(std::move(d));
    }
    if (static_cast<int>(s.increments.size()) != N) throw std::runtime_error("increments csv: missing rows");
    return s;
}

ModeRoughPath::ModeRoughPath(TimeGrid grid, std::vector<Eigen::VectorXd> level1, std::vector<Eigen::MatrixXd> level2)
    : grid_(grid), q_(level1.empty() ? 0 : static_cast<int>(level1.front().size())), level1_(std::move(level1)),
      level2_(std::move(level2)) {
    if (static_cast<int>(level1_.size()) != grid_.steps() || level2_.size() != level1_.size())
        throw std::invalid_argument("ModeRoughPath: one generator per interval required");
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> ModeRoughPath::reconstruct(int s, int t) const {
    return chen_fold<Eigen::VectorXd, Eigen::MatrixXd>(
        level1_, level2_, s, t,
        [](const Eigen::VectorXd& left, const Eigen::VectorXd& right) -> Eigen::MatrixXd {
            return left * right.transpose();
        });
}

ModeRoughPath ModeRoughPath::coarsen(int factor) const {
    if (factor < 1 || grid_.steps() % factor != 0) throw std::invalid_argument("coarsen: factor must divide N");
    std::vector<Eigen::VectorXd> l1;
    std::vector<Eigen::MatrixXd> l2;
    for (int i = 0; i < grid_.steps(); i += factor) {
        auto [a, A] = reconstruct(i, i + factor);
        l1.push_back(std::move(a));
        l2.push_back(std::move(A));
    }
    return ModeRoughPath(TimeGrid(grid_.horizon(), grid_.steps() / factor), std::move(l1), std::move(l2));
}

ModeRoughPath ModeRoughPath::dilate(double lambda) const {
    if (lambda < 0.0) throw std::invalid_argument("dilate: lambda must be >= 0");
    auto l1 = level1_;
    auto l2 = level2_;
    for (auto& v : l1) v *= lambda;
    for (auto& m : l2) m *= lambda * lambda;
    return ModeRoughPath(grid_, std::move(l1), std::move(l2));
}

double mode_chen_defect(const ModeRoughPath& rp) {
    const int n = rp.grid().nodes();
    // Dense pair tables, then every triple.
    std::vector<std::vector<Eigen::VectorXd>> a(n);
    std::vector<std::vector<Eigen::MatrixXd>> A(n);
    for (int s = 0; s < n; ++s) {
        a[s].resize(n);
        A[s].resize(n);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(rp.q());
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rp.q(), rp.q());
        a[s][s] = x;
        A[s][s] = X;
        for (int t = s; t + 1 < n; ++t) {
            X += rp.level2()[t] + x * rp.level1()[t].transpose();
            x += rp.level1()[t];
            a[s][t + 1] = x;
            A[s][t + 1] = X;
        }
    }
    double worst = 0.0;
    for (int s = 0; s < n; ++s)
        for (int u = s; u < n; ++u)
            for (int t = u; t < n; ++t) {
                const Eigen::MatrixXd d = A[s][t] - A[s][u] - A[u][t] - a[s][u] * a[u][t].transpose();
                worst = std::max(worst, d.cwiseAbs().maxCoeff());
            }
    return worst;
}

double mode_shuffle_defect(const ModeRoughPath& rp) {
    const int n = rp.grid().nodes();
    double worst = 0.0;
    for (int s = 0; s < n; ++s) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(rp.q());
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rp.q(), rp.q());
        for (int t = s; t + 1 < n; ++t) {
            X += rp.level2()[t] + x * rp.level1()[t].transpose();
            x += rp.level1()[t];
            const Eigen::MatrixXd sym = 0.5 * (X + X.transpose());
            worst = std::max(worst, (sym - 0.5 * x * x.transpose()).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

CameronMartinPath CameronMartinPath::from_function(const TimeGrid& grid, int q,
                                                   const std::function<Eigen::VectorXd(double)>& h) {
    CameronMartinPath out{grid, {}};
    for (int i = 0; i < grid.nodes(); ++i) {
        Eigen::VectorXd v = h(grid.node(i));
        if (v.size() != q) throw std::invalid_argument("CameronMartinPath: wrong dimension");
        out.values.push_back(std::move(v));
    }
    if (out.values.front().norm() != 0.0) throw std::invalid_argument("CameronMartinPath: h_0 must be 0");
    return out;
}

ModeRoughPath lift_increments(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& increments) {
    std::vector<Eigen::MatrixXd> l2;
    l2.reserve(increments.size());
    for (const auto& d : increments) l2.push_back(0.5 * d * d.transpose());
    return ModeRoughPath(grid, increments, std::move(l2));
}

ModeRoughPath piecewise_linear_lift(const BMSample& sample) { return lift_increments(sample.grid, sample.increments); }

ModeRoughPath piecewise_linear_lift(const CameronMartinPath& h) {
    std::vector<Eigen::VectorXd> inc;
    for (std::size_t i = 0; i + 1 < h.values.size(); ++i) inc.push_back(h.values[i + 1] - h.values[i]);
    return lift_increments(h.grid, inc);
}

DyadicApprox dyadic_approx(const BMSample& sample, int level) {
    const int N = sample.grid.steps();
    if (!std::has_single_bit(static_cast<unsigned>(N))) throw std::invalid_argument("dyadic_approx: grid not dyadic");
    const int M = std::countr_zero(static_cast<unsigned>(N));
    if (level < 0 || level > M) throw std::invalid_argument("dyadic_approx: level must be in [0, M]");
    const int block = 1 << (M - level);
    if (block == 1) return {sample, piecewise_linear_lift(sample)};
    const auto w = sample.path();
    std::vector<Eigen::VectorXd> interp(N + 1);
    for (int b = 0; b < N; b += block) {
        interp[b] = w[b];
        for (int i = 1; i < block; ++i)
            interp[b + i] = w[b] + (static_cast<double>(i) / block) * (w[b + block] - w[b]);
    }
    interp[N] = w[N];
    BMSample out{sample.grid, sample.q, sample.seed, {}};
    out.increments.reserve(N);
    for (int i = 0; i < N; ++i) out.increments.push_back(interp[i + 1] - interp[i]);
    auto lift = piecewise_linear_lift(out);
    return {std::move(out), std::move(lift)};
}

double cm_rate(const CameronMartinPath& h) {
    double total = 0.0;
    const double dt = h.grid.dt();
    for (std::size_t i = 0; i + 1 < h.values.size(); ++i) total += (h.values[i + 1] - h.values[i]).squaredNorm() / dt;
    return total;
}

}  // namespace rllg
