#include "bayesdetect/montecarlo.hpp"

#include "bayesdetect/errors.hpp"

#include <Eigen/Dense>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace bayesdetect {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

/// Streaming mean of exp(l_i) kept relative to the running maximum of l_i.
struct LogMeanAccumulator {
    double peak = -std::numeric_limits<double>::infinity();
    double s1 = 0.0;
    double s2 = 0.0;
    long n = 0;

    void add(double l) {
        if (l > peak) {
            const double r = std::exp(peak - l);
            s1 *= r;
            s2 *= r * r;
            peak = l;
        }
        const double w = std::exp(l - peak);
        s1 += w;
        s2 += w * w;
        ++n;
    }

    void merge(const LogMeanAccumulator& o) {
        if (o.n == 0) return;
        if (o.peak > peak) {
            const double r = std::exp(peak - o.peak);
            s1 = s1 * r + o.s1;
            s2 = s2 * r * r + o.s2;
            peak = o.peak;
        } else {
            const double r = std::exp(o.peak - peak);
            s1 += o.s1 * r;
            s2 += o.s2 * r * r;
        }
        n += o.n;
    }
};

constexpr std::uint64_t kOracleDomain = 0x6f7261636c65ULL;
constexpr long kOracleChunk = 1L << 15;

}  // namespace

double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double Scenario::sigma2() const { return sigma2_from_snr_db(snr_db); }

void Scenario::validate() const {
    if (n_sensors < 1 || n_snapshots < 1 || n_sources < 1) {
        throw DomainError("scenario needs N, L, M >= 1");
    }
    if (n_trials < 1) throw DomainError("scenario needs at least one trial");
    if (!std::isfinite(snr_db)) throw DomainError("SNR must be finite");
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t index,
                     std::uint64_t role) {
    std::uint64_t state = seed;
    std::uint64_t key = splitmix64(state);
    for (std::uint64_t part : {domain, index, role}) {
        state = key ^ (part * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        key = splitmix64(state);
    }
    state = key;
    for (auto& word : s_) word = splitmix64(state);
}

StreamRng::result_type StreamRng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

Complex StreamRng::complex_normal() {
    const double re = normal_(*this);
    const double im = normal_(*this);
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

SampleMatrix synthesize_observation(const Scenario& s, Hypothesis hypothesis, long trial_index) {
    s.validate();
    const auto hyp = static_cast<std::uint64_t>(hypothesis);
    const auto idx = static_cast<std::uint64_t>(trial_index);
    const int n = s.n_sensors, l = s.n_snapshots, m = s.n_sources;
    const double sigma = std::sqrt(s.sigma2());

    SampleMatrix y(n, l);
    StreamRng noise(s.seed, hyp, idx, static_cast<std::uint64_t>(StreamRole::noise));
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < l; ++t) y(i, t) = sigma * noise.complex_normal();
    }
    if (hypothesis == Hypothesis::h0) return y;

    StreamRng channel_rng(s.seed, hyp, idx, static_cast<std::uint64_t>(StreamRole::channel));
    StreamRng signal_rng(s.seed, hyp, idx, static_cast<std::uint64_t>(StreamRole::signal));
    const double h_scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<Complex> h(static_cast<std::size_t>(n) * m);
    for (auto& v : h) v = h_scale * channel_rng.complex_normal();
    std::vector<Complex> sig(static_cast<std::size_t>(m) * l);
    for (auto& v : sig) v = signal_rng.complex_normal();
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < l; ++t) {
            Complex acc{};
            for (int j = 0; j < m; ++j) acc += h[i * m + j] * sig[j * l + t];
            y(i, t) += acc;
        }
    }
    return y;
}

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
    const long workers = std::clamp<long>(threads, 1, std::max<long>(count, 1));
    if (workers == 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (long i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

OracleEstimate mc_signal_likelihood_oracle(const SampleMatrix& y, int m, double sigma2,
                                           long n_samples, std::uint64_t seed, int threads) {
    if (!(sigma2 > 0.0)) throw DomainError("oracle requires sigma2 > 0");
    if (m < 1) throw DomainError("oracle requires m >= 1");
    if (m > y.n_sensors()) throw UnsupportedError("oracle requires m <= N");
    if (n_samples < 1000) throw DomainError("oracle requires at least 1000 samples");

    const int n = y.n_sensors();
    const int l = y.n_snapshots();
    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> ymat(y.entries().data(), n, l);
    const Eigen::MatrixXcd gram = ymat * ymat.adjoint();
    const double trace = gram.trace().real();
    const double log_base = -static_cast<double>(n) * l * std::log(std::numbers::pi) -
                            static_cast<double>(l) * (n - m) * std::log(sigma2);
    const double h_scale = 1.0 / std::sqrt(static_cast<double>(m));

    const long chunks = (n_samples + kOracleChunk - 1) / kOracleChunk;
    std::vector<LogMeanAccumulator> partial(static_cast<std::size_t>(chunks));

    parallel_for(chunks, threads, [&](long c) {
        StreamRng rng(seed, kOracleDomain, static_cast<std::uint64_t>(c),
                      static_cast<std::uint64_t>(StreamRole::oracle));
        const long begin = c * kOracleChunk;
        const long end = std::min(n_samples, begin + kOracleChunk);
        Eigen::MatrixXcd h(n, m);
        Eigen::MatrixXcd inner(m, m);
        Eigen::MatrixXcd projected(m, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
        LogMeanAccumulator acc;
        for (long s = begin; s < end; ++s) {
            for (int j = 0; j < m; ++j) {
                for (int i = 0; i < n; ++i) h(i, j) = h_scale * rng.complex_normal();
            }
            double quad = 0.0;
            double log_det = 0.0;
            if (m == 1) {
                // Sigma = sigma2 I + h h^H: one eigenvalue sigma2 + |h|^2, the rest sigma2.
                const double mu = sigma2 + h.col(0).squaredNorm();
                quad = (h.col(0).adjoint() * gram * h.col(0)).value().real() / mu;
                log_det = std::log(mu);
            } else {
                // Nonzero part of Sigma's spectrum: eigenpairs of sigma2 I + H^H H.
                inner.noalias() = h.adjoint() * h;
                inner.diagonal().array() += sigma2;
                eig.compute(inner);
                projected.noalias() = h.adjoint() * gram * h;
                const auto& vecs = eig.eigenvectors();
                for (int j = 0; j < m; ++j) {
                    const double mu = eig.eigenvalues()(j);
                    quad += (vecs.col(j).adjoint() * projected * vecs.col(j)).value().real() / mu;
                    log_det += std::log(mu);
                }
            }
            acc.add(log_base - l * log_det - (trace - quad) / sigma2);
        }
        partial[static_cast<std::size_t>(c)] = acc;
    });

    LogMeanAccumulator total;
    for (const auto& p : partial) total.merge(p);
    const double nn = static_cast<double>(total.n);
    const double mean = total.s1 / nn;
    const double var = std::max(0.0, (total.s2 / nn - mean * mean) * nn / (nn - 1.0));
    OracleEstimate out;
    out.estimate = SignedLog::from_log(total.peak + std::log(mean));
    out.std_error_log = std::sqrt(var / nn) / mean;
    out.n_samples = total.n;
    return out;
}

double exact_n1_likelihood_oracle(double x1, double sigma2, int n_snapshots) {
    if (!(x1 >= 0.0) || !(sigma2 > 0.0) || n_snapshots < 1) {
        throw DomainError("exact N=1 oracle needs x1 >= 0, sigma2 > 0, L >= 1");
    }
    const double l = n_snapshots;
    auto density = [&](double nu) {
        const double c = nu + sigma2;
        return std::exp(-l * std::log(std::numbers::pi * c) - x1 / c - nu);
    };
    // The integrand rises towards its mode when x1 is large; split there.
    const double mode = std::max(0.0, 0.5 * (-(l + 2.0 * sigma2) + std::sqrt(l * l + 4.0 * x1)));
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    double err_left = 0.0, err_right = 0.0;
    const double left = mode > 0.0 ? Rule::integrate(density, 0.0, mode, 20, 1e-13, &err_left) : 0.0;
    const double right = Rule::integrate(density, mode, std::numeric_limits<double>::infinity(), 20,
                                         1e-13, &err_right);
    const double value = left + right;
    if (!(value > 0.0) || (err_left + err_right) > 1e-10 * value) {
        throw NumericError("exact N=1 oracle quadrature did not reach 1e-10 relative");
    }
    return value;
}

}  // namespace bayesdetect
