#pragma once

namespace mflab {

// Process-wide threading policy. Deterministic mode reduces in a fixed order
// so results are bitwise reproducible for a given thread count.
struct ExecutionPolicy
{
    int threads = 1;
    bool deterministic = true;
};

void set_execution_policy(const ExecutionPolicy& policy);
ExecutionPolicy execution_policy();

// MFLAB_THREADS if set and positive, else `fallback`.
int threads_from_environment(int fallback);

} // namespace mflab
