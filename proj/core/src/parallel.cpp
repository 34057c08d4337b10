#include "medzisc/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cstdlib>
#include <string>
#include <thread>

namespace medzisc {

int default_thread_count() {
    if (const char* env = std::getenv("MEDZISC_THREADS")) {
        try {
            int value = std::stoi(env);
            if (value > 0) {
                return value;
            }
        } catch (const std::exception&) {
            // fall through to hardware default
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) {
        return;
    }
    if (threads == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    auto run = [&] {
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, 1),
                          [&](const tbb::blocked_range<std::size_t>& range) {
                              for (std::size_t i = range.begin(); i != range.end(); ++i) {
                                  body(i);
                              }
                          });
    };

    if (threads > 1) {
        tbb::task_arena arena(threads);
        arena.execute(run);
    } else {
        run();
    }
}

}  // namespace medzisc
