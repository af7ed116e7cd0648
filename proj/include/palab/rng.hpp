#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace palab {

// Counter-based deterministic generator: sample s derives its own stream from
// (seed, s), so Monte Carlo results are bit-identical regardless of worker
// count or scheduling.
class CounterRng {
  public:
    explicit CounterRng(uint64_t seed) : state_(seed) {}

    static CounterRng for_sample(uint64_t seed, uint64_t index) {
        uint64_t s = seed;
        s ^= 0x9e3779b97f4a7c15ull + (index << 1) + (index >> 3);
        CounterRng r(s);
        r.next_u64();
        r.next_u64();
        return r;
    }

    uint64_t next_u64() {  // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    long uniform_int(long n) { return static_cast<long>(next_u64() % uint64_t(n)); }

    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        has_cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    // standard complex gaussian: E|z|^2 = 1
    std::complex<double> cnormal() {
        return {normal() * M_SQRT1_2, normal() * M_SQRT1_2};
    }

  private:
    uint64_t state_;
    double cached_ = 0;
    bool has_cached_ = false;
};

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
    long samples = 0;
};

struct Accumulator {
    double sum = 0, sumsq = 0;
    long n = 0;
    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    Estimate estimate() const {
        Estimate e;
        e.samples = n;
        if (n == 0) return e;
        e.mean = sum / double(n);
        if (n > 1) {
            double var = (sumsq - sum * sum / double(n)) / double(n - 1);
            e.stderr_ = std::sqrt(std::max(0.0, var) / double(n));
        }
        return e;
    }
};

// Deterministic parallel Monte Carlo over sample indices [0, samples).
// fn(rng, index) returns one scalar observation.
Estimate mc_run(long samples, uint64_t seed, int threads,
                const std::function<double(CounterRng&, long)>& fn);

// Vector-valued variant: fn fills a fixed-size observation vector.
std::vector<Estimate> mc_run_vector(long samples, uint64_t seed, int threads, size_t dim,
                                    const std::function<void(CounterRng&, long, std::vector<double>&)>& fn);

}  // namespace palab
