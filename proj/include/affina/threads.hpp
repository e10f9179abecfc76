#pragma once

namespace affina {

// Caps worker parallelism. Order of precedence: explicit count (> 0), the
// AFFINA_THREADS environment variable, hardware default.
void set_thread_count(int n);
int thread_count();

}  // namespace affina
