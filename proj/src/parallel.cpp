#include "nodal/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace nodal {

int worker_count() {
    if (const char* env = std::getenv("NODAL_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void for_each_chunk(std::size_t count, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t chunks = chunk_count(count, chunk_size);
    if (chunks == 0) return;

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), chunks);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_chunk = chunks;

    auto run = [&] {
        for (;;) {
            const std::size_t chunk = next.fetch_add(1);
            if (chunk >= chunks) return;
            const std::size_t begin = chunk * chunk_size;
            const std::size_t end = std::min(count, begin + chunk_size);
            try {
                body(chunk, begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (chunk < error_chunk) {
                    error_chunk = chunk;
                    error = std::current_exception();
                }
            }
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
    }

    if (error) std::rethrow_exception(error);
}

}  // namespace nodal
