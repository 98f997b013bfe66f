#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mwlp {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NonHermitian: return "NonHermitian";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::SingularPoint: return "SingularPoint";
        case ErrorCode::NonPositiveScale: return "NonPositiveScale";
        case ErrorCode::EmptyFamily: return "EmptyFamily";
        case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
        case ErrorCode::ZeroMass: return "ZeroMass";
        case ErrorCode::EmptyBand: return "EmptyBand";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::OffsetNotOnGrid: return "OffsetNotOnGrid";
        case ErrorCode::BandTooLarge: return "BandTooLarge";
        case ErrorCode::DivergentFit: return "DivergentFit";
        case ErrorCode::Divergent: return "Divergent";
        case ErrorCode::HypothesisViolated: return "HypothesisViolated";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::BandViolation: return "BandViolation";
        case ErrorCode::CoverageGap: return "CoverageGap";
        case ErrorCode::DegenerateBump: return "DegenerateBump";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned count) {
    if (count == 0) count = std::max(1u, std::thread::hardware_concurrency());
    g_threads.store(count);
}

unsigned thread_count() { return g_threads.load(); }

void parallel_chunks(std::size_t count, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t chunks = (count + chunk - 1) / chunk;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) body(c * chunk, std::min(count, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chunks; c = next++) {
                try {
                    body(c * chunk, std::min(count, (c + 1) * chunk));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mwlp
