#include "rsl/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace rsl {

void Moments::add(double w)
{
    ++count;
    const double n = static_cast<double>(count);
    const double delta = w - mean;
    mean += delta / n;
    m2 += delta * (w - mean);
    const double w2 = w * w;
    mean_sq += (w2 - mean_sq) / n;
    mean_quad += (w2 * w2 - mean_quad) / n;
}

void Moments::merge(const Moments& o)
{
    if (o.count == 0)
        return;
    if (count == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double n = na + nb;
    const double delta = o.mean - mean;
    mean += delta * nb / n;
    m2 += o.m2 + delta * delta * na * nb / n;
    mean_sq = (na * mean_sq + nb * o.mean_sq) / n;
    mean_quad = (na * mean_quad + nb * o.mean_quad) / n;
    count += o.count;
}

double Moments::kurtosis() const
{
    return mean_sq > 0.0 ? mean_quad / (mean_sq * mean_sq) : 0.0;
}

long chunk_size(long samples)
{
    return std::clamp(samples / 16, 64L, 8192L);
}

McResult run_monte_carlo(long samples, int outputs, std::uint64_t seed, std::uint64_t stream,
                         int threads, const SampleFn& draw)
{
    if (samples < 1)
        throw std::invalid_argument("run_monte_carlo: samples must be positive");
    if (outputs < 1)
        throw std::invalid_argument("run_monte_carlo: need at least one output");
    const long chunk = chunk_size(samples);
    const int chunks = static_cast<int>((samples + chunk - 1) / chunk);
    std::vector<std::vector<Moments>> per_chunk(chunks, std::vector<Moments>(outputs));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        std::vector<double> out(outputs);
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= chunks)
                return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure)
                    return;
            }
            try {
                RngStream rng(seed, mix64(stream ^ mix64(static_cast<std::uint64_t>(c))));
                const long begin = static_cast<long>(c) * chunk;
                const long end = std::min(samples, begin + chunk);
                auto& m = per_chunk[c];
                for (long i = begin; i < end; ++i) {
                    std::fill(out.begin(), out.end(), 0.0);
                    draw(rng, out);
                    for (int k = 0; k < outputs; ++k) {
                        if (!std::isfinite(out[k])) {
                            std::ostringstream msg;
                            msg << "non-finite sample weight " << out[k] << " (output " << k << ", chunk " << c
                                << ", draw " << i << ")";
                            throw NonFiniteSample(msg.str());
                        }
                        m[k].add(out[k]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };

    int nthreads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nthreads = std::min(nthreads, chunks);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    McResult r;
    r.samples = samples;
    r.chunks = chunks;
    r.full.assign(outputs, Moments{});
    r.half.assign(outputs, Moments{});
    const int half_chunks = std::max(1, chunks / 2);
    for (int c = 0; c < chunks; ++c)
        for (int k = 0; k < outputs; ++k) {
            r.full[k].merge(per_chunk[c][k]);
            if (c < half_chunks)
                r.half[k].merge(per_chunk[c][k]);
        }
    return r;
}

} // namespace rsl
