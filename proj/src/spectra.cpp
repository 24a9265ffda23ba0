#include "donorcnot/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace donorcnot {

std::size_t TransitionTable::allowed_count() const {
  return static_cast<std::size_t>(
      std::count_if(transitions.begin(), transitions.end(), [](const Transition& t) { return t.allowed; }));
}

TransitionTable transition_table(const HermitianOperator& drift, double relative_threshold, double reference_mhz) {
  if (drift.dim() != kElectronDim) throw std::invalid_argument("transition table expects the 8x8 electron drift");
  if (!(relative_threshold > 0.0)) throw std::invalid_argument("element threshold must be positive");
  const ComplexMatrix& zt = electron_total(PauliAxis::Z).matrix();
  const double scale = std::max(1.0, max_abs(drift.matrix()));
  if (max_abs(commutator(drift.matrix(), zt)) > 1e-9 * scale) {
    throw std::invalid_argument("drift does not conserve total electron magnetization");
  }

  // Eigenvectors are computed inside each magnetization sector so every
  // eigenstate carries a definite M, even across cross-sector degeneracies.
  struct Eigenstate {
    double energy;
    int m;
    ComplexVector vec;
  };
  std::vector<Eigenstate> states;
  for (int m : {-3, -1, 1, 3}) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < kElectronDim; ++i) {
      if (std::lround(zt(i, i).real()) == m) idx.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(idx.size());
    ComplexMatrix block(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) block(r, c) = drift(idx[r], idx[c]);
    }
    const EigenSystem es = hermitian_eigensystem(HermitianOperator(block));
    for (Eigen::Index k = 0; k < n; ++k) {
      ComplexVector v = ComplexVector::Zero(kElectronDim);
      for (Eigen::Index r = 0; r < n; ++r) v(idx[r]) = es.vectors(r, k);
      states.push_back({es.values(k), m, std::move(v)});
    }
  }
  std::stable_sort(states.begin(), states.end(),
                   [](const Eigenstate& a, const Eigenstate& b) { return a.energy < b.energy; });

  TransitionTable table;
  table.reference_mhz = reference_mhz;
  table.energies.resize(kElectronDim);
  table.states.resize(kElectronDim, kElectronDim);
  for (Eigen::Index i = 0; i < kElectronDim; ++i) {
    table.energies(i) = states[i].energy;
    table.states.col(i) = states[i].vec;
    table.magnetization.push_back(states[i].m);
  }

  const ComplexMatrix& xt = electron_total(PauliAxis::X).matrix();
  const ComplexMatrix& yt = electron_total(PauliAxis::Y).matrix();
  for (int a = 0; a < kElectronDim; ++a) {
    for (int b = a + 1; b < kElectronDim; ++b) {
      Transition t;
      // Orient each pair from lower to higher magnetization so that the
      // offset is the detuning of the carrier that drives it.
      const bool flip = states[a].m > states[b].m;
      t.state_a = flip ? b : a;
      t.state_b = flip ? a : b;
      const auto& sa = states[t.state_a];
      const auto& sb = states[t.state_b];
      const Complex x = sa.vec.dot(xt * sb.vec);
      const Complex y = sa.vec.dot(yt * sb.vec);
      t.element = std::sqrt(std::norm(x) + std::norm(y));
      t.offset_mhz = sb.energy - sa.energy;
      t.frequency_mhz = std::abs(t.offset_mhz);
      table.max_element = std::max(table.max_element, t.element);
      table.transitions.push_back(t);
    }
  }
  for (auto& t : table.transitions) t.allowed = t.element >= relative_threshold * table.max_element && t.element > 0.0;
  std::stable_sort(table.transitions.begin(), table.transitions.end(), [](const Transition& a, const Transition& b) {
    if (a.frequency_mhz != b.frequency_mhz) return a.frequency_mhz < b.frequency_mhz;
    return a.offset_mhz < b.offset_mhz;
  });
  return table;
}

TransitionTable transition_table(const DeviceParams& params, const NuclearConfig& nuclei, double relative_threshold) {
  // gamma_e B Z per spin splits each level pair by 2 gamma_e B.
  return transition_table(electron_drift(params, nuclei), relative_threshold, 2.0 * params.electron_zeeman_mhz());
}

std::vector<SpectralLine> allowed_lines(const TransitionTable& table, double merge_tolerance) {
  if (!(merge_tolerance >= 0.0)) throw std::invalid_argument("merge tolerance must be non-negative");
  std::vector<const Transition*> allowed;
  for (const auto& t : table.transitions) {
    if (t.allowed) allowed.push_back(&t);
  }
  std::sort(allowed.begin(), allowed.end(), [](const Transition* a, const Transition* b) {
    return a->offset_mhz < b->offset_mhz;
  });

  std::vector<SpectralLine> lines;
  double sum = 0.0;
  double strength2 = 0.0;
  double last = 0.0;
  int count = 0;
  auto flush = [&] {
    if (count > 0) lines.push_back({sum / count, std::sqrt(strength2), count});
    sum = strength2 = 0.0;
    count = 0;
  };
  for (const Transition* t : allowed) {
    if (count > 0 && !(t->offset_mhz - last < merge_tolerance)) flush();
    sum += t->offset_mhz;
    strength2 += t->element * t->element;
    last = t->offset_mhz;
    ++count;
  }
  flush();
  return lines;
}

std::vector<double> allowed_frequencies(const TransitionTable& table, double merge_tolerance) {
  std::vector<double> out;
  for (const auto& line : allowed_lines(table, merge_tolerance)) out.push_back(line.offset_mhz);
  return out;
}

bool band_overlap(std::span<const double> freqs_a, std::span<const double> freqs_b, double tolerance) {
  // Merge-style scan over the two sorted lists.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < freqs_a.size() && j < freqs_b.size()) {
    if (std::abs(freqs_a[i] - freqs_b[j]) < tolerance) return true;
    if (freqs_a[i] < freqs_b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

}  // namespace donorcnot
