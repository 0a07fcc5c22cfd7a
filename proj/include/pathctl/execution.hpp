#pragma once

#include <cstddef>
#include <exception>

namespace pathctl {

/// Selects between the OpenMP kernel and its serial reference.
///
/// Both paths produce bit-identical results: work items are computed
/// independently and reduced in index order on the calling thread.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, count). Exceptions thrown by the body inside the
/// parallel region are captured and the first one is rethrown afterwards.
template <typename Body>
void for_each_index(Execution exec, std::size_t count, Body&& body) {
    if (exec == Execution::parallel) {
        std::exception_ptr error;
        const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(pathctl_error)
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (std::size_t i = 0; i < count; ++i) body(i);
    }
}

}  // namespace pathctl
