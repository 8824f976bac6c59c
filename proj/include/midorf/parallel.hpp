#pragma once

#include <functional>

namespace midorf {

enum class Exec { Serial, Parallel };

// Worker cap from MIDORF_THREADS (0 or unset = all hardware threads).
int worker_count();

// Runs fn(i) for i in [0, n). With Exec::Parallel the iterations are
// distributed over OpenMP threads; callers keep determinism by writing
// per-index results and reducing in index order afterwards.
void parallel_for(int n, Exec exec, const std::function<void(int)>& fn);

}  // namespace midorf
