#include "mflab/execution.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <omp.h>

namespace mflab {

namespace {
std::mutex policy_mutex;
ExecutionPolicy current_policy{};
} // namespace

void set_execution_policy(const ExecutionPolicy& policy)
{
    std::lock_guard<std::mutex> lock(policy_mutex);
    current_policy = policy;
    if (current_policy.threads < 1)
        current_policy.threads = 1;
    omp_set_num_threads(current_policy.threads);
}

ExecutionPolicy execution_policy()
{
    std::lock_guard<std::mutex> lock(policy_mutex);
    return current_policy;
}

int threads_from_environment(int fallback)
{
    if (const char* env = std::getenv("MFLAB_THREADS"))
    {
        try
        {
            int n = std::stoi(env);
            if (n > 0)
                return n;
        }
        catch (const std::exception&)
        {
        }
    }
    return fallback;
}

} // namespace mflab
