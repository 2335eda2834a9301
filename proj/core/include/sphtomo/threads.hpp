#pragma once

namespace sphtomo {

/// Caps the worker threads used inside library calls; 0 restores the
/// default (hardware concurrency). Results do not depend on this setting.
void set_thread_limit(unsigned n) noexcept;
[[nodiscard]] unsigned thread_limit() noexcept;

}  // namespace sphtomo
