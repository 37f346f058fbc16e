#pragma once

#include "evofrac/time_grid.hpp"

#include <iosfwd>
#include <string>

namespace evofrac {

/// Writes the CSV layout `t,re_0,im_0,...,re_{d-1},im_{d-1}`, one row per node,
/// 17 significant digits (IEEE-754 round-trippable).
void write_signal_csv(std::ostream& out, const Signal& u);
void write_signal_csv(const std::string& path, const Signal& u);

/// Reads a signal back; the grid (t_start, dt, n_steps) is recovered from the
/// t column and validated against the TimeGrid invariants. rho is supplied by
/// the caller since the CSV does not carry it.
Signal read_signal_csv(std::istream& in, double rho);
Signal read_signal_csv(const std::string& path, double rho);

}  // namespace evofrac
