#include "nvreg/clifford.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "nvreg/rng.hpp"

namespace nvreg {
namespace {

// single-qubit products: mul_op[a][b], mul_ph[a][b] with
// sigma_a sigma_b = i^ph sigma_c
constexpr uint8_t mul_op[4][4] = {
    {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
constexpr uint8_t mul_ph[4][4] = {
    {0, 0, 0, 0}, {0, 0, 1, 3}, {0, 3, 0, 1}, {0, 1, 3, 0}};

Mat pauli2(int op) {
  Mat m(2, 2);
  switch (op) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cxd(0, -1), cxd(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

PauliString generator_string(int n, int index) {
  // index: 2j for X_j, 2j+1 for Z_j
  PauliString p;
  p.n_qubits = n;
  p.op[index / 2] = (index % 2 == 0) ? 1 : 3;
  return p;
}

CliffordElement identity_element(int n) {
  CliffordElement e;
  e.n_qubits = n;
  for (int g = 0; g < 2 * n; ++g) e.images[g] = generator_string(n, g);
  e.unitary = ident(1 << n);
  return e;
}

// tableau-only composition used during table construction
void compose_images(const CliffordElement& a, const CliffordElement& b,
                    CliffordElement& out) {
  out.n_qubits = a.n_qubits;
  for (int g = 0; g < 2 * a.n_qubits; ++g)
    out.images[g] = clifford_act(a, b.images[g]);
}

Mat rotation2(double area, double xi) {
  double c = std::cos(area / 2), s = std::sin(area / 2);
  Mat g = std::cos(xi) * pauli2(1) - std::sin(xi) * pauli2(2);
  return c * ident(2) - cxd(0, 1) * s * g;
}

struct Tables1q {
  std::vector<CliffordElement> group;               // sorted by key
  std::unordered_map<uint32_t, int> index;
  std::vector<std::vector<NativeGate>> words;       // minimal, per element
};

const std::array<NativeGate, 6>& native_1q_gates() {
  static const std::array<NativeGate, 6> gates = {{
      {1, PulseKind::pi_half, PulsePhase::x, false},
      {1, PulseKind::pi_half, PulsePhase::minus_x, false},
      {1, PulseKind::pi_half, PulsePhase::y, false},
      {1, PulseKind::pi_half, PulsePhase::minus_y, false},
      {1, PulseKind::pi, PulsePhase::x, false},
      {1, PulseKind::pi, PulsePhase::y, false},
  }};
  return gates;
}

const Tables1q& tables_1q() {
  static Tables1q t;
  static std::once_flag flag;
  std::call_once(flag, [] {
    std::vector<CliffordElement> elems;
    std::vector<std::vector<NativeGate>> words;
    std::unordered_map<uint32_t, int> seen;
    elems.push_back(identity_element(1));
    words.push_back({});
    seen.emplace(elems[0].key(), 0);
    std::vector<CliffordElement> gens;
    for (const auto& g : native_1q_gates())
      gens.push_back(tableau_from_unitary(native_gate_unitary(g, 1)));
    for (size_t head = 0; head < elems.size(); ++head) {
      CliffordElement parent = elems[head];
      std::vector<NativeGate> pword = words[head];
      for (size_t gi = 0; gi < gens.size(); ++gi) {
        CliffordElement child = compose(gens[gi], parent);
        uint32_t k = child.key();
        if (seen.count(k)) continue;
        seen.emplace(k, static_cast<int>(elems.size()));
        auto w = pword;
        w.push_back(native_1q_gates()[gi]);
        elems.push_back(std::move(child));
        words.push_back(std::move(w));
      }
    }
    if (elems.size() != 24)
      throw std::logic_error("single-qubit Clifford enumeration failed");
    // canonical order: sort by key, carrying the words along
    std::vector<int> order(elems.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return elems[static_cast<size_t>(a)].key() <
             elems[static_cast<size_t>(b)].key();
    });
    for (int i : order) {
      t.index.emplace(elems[static_cast<size_t>(i)].key(),
                      static_cast<int>(t.group.size()));
      t.group.push_back(elems[static_cast<size_t>(i)]);
      t.words.push_back(words[static_cast<size_t>(i)]);
    }
  });
  return t;
}

std::vector<NativeGate> retarget(const std::vector<NativeGate>& word,
                                 int qubit) {
  std::vector<NativeGate> out = word;
  for (auto& g : out)
    if (!g.entangling) g.qubit = qubit;
  return out;
}

struct Decomp {
  int rep = 0;
  int16_t l1 = 0, l2 = 0, r1 = 0, r2 = 0;
};

struct Tables2q {
  std::vector<CliffordElement> group;  // sorted by key
  std::unordered_map<uint32_t, int> index;
  std::unordered_map<uint32_t, Decomp> decomp;
  std::array<std::vector<NativeGate>, 4> rep_words;
};

// embed a single-qubit tableau on one qubit of a pair
CliffordElement embed_local(const CliffordElement& e, int qubit) {
  CliffordElement out = identity_element(2);
  int base = qubit == 1 ? 0 : 2;
  for (int g = 0; g < 2; ++g) {
    PauliString img;
    img.n_qubits = 2;
    img.op[qubit - 1] = e.images[g].op[0];
    img.phase = e.images[g].phase;
    out.images[base + g] = img;
  }
  out.unitary = qubit == 1 ? kron(e.unitary, ident(2))
                           : kron(ident(2), e.unitary);
  return out;
}

const Tables2q& tables_2q() {
  static Tables2q t;
  static std::once_flag flag;
  std::call_once(flag, [] {
    // group enumeration from local generators plus the entangler
    std::vector<CliffordElement> gens;
    for (const auto& g : native_1q_gates()) {
      CliffordElement e1 = tableau_from_unitary(native_gate_unitary(g, 1));
      gens.push_back(embed_local(e1, 1));
      gens.push_back(embed_local(e1, 2));
    }
    NativeGate zz;
    zz.qubit = 0;
    zz.entangling = true;
    gens.push_back(tableau_from_unitary(sqrt_zz_unitary()));

    std::vector<CliffordElement> elems;
    std::unordered_map<uint32_t, int> seen;
    elems.push_back(identity_element(2));
    seen.emplace(elems[0].key(), 0);
    for (size_t head = 0; head < elems.size(); ++head) {
      CliffordElement parent = elems[head];
      for (const auto& gen : gens) {
        CliffordElement child = compose(gen, parent);
        uint32_t k = child.key();
        if (seen.count(k)) continue;
        seen.emplace(k, static_cast<int>(elems.size()));
        elems.push_back(std::move(child));
      }
    }
    if (elems.size() != 11520)
      throw std::logic_error("two-qubit Clifford enumeration failed");
    std::sort(elems.begin(), elems.end(),
              [](const CliffordElement& a, const CliffordElement& b) {
                return a.key() < b.key();
              });
    t.group = std::move(elems);
    t.index.reserve(t.group.size());
    for (size_t i = 0; i < t.group.size(); ++i)
      t.index.emplace(t.group[i].key(), static_cast<int>(i));

    // canonical entangling-class representatives as native words
    const auto& cnot12 = cnot_pulse_train();
    std::vector<NativeGate> cnot21;
    for (auto g : cnot12) {
      if (!g.entangling) g.qubit = g.qubit == 1 ? 2 : 1;
      cnot21.push_back(g);
    }
    t.rep_words[0] = {};
    t.rep_words[1] = cnot12;
    t.rep_words[2] = cnot12;
    t.rep_words[2].insert(t.rep_words[2].end(), cnot21.begin(), cnot21.end());
    t.rep_words[3] = t.rep_words[2];
    t.rep_words[3].insert(t.rep_words[3].end(), cnot12.begin(), cnot12.end());

    std::array<CliffordElement, 4> reps;
    for (int r = 0; r < 4; ++r)
      reps[r] = tableau_from_unitary(native_word_unitary(t.rep_words[r], 2));

    const auto& t1 = tables_1q();
    int id1 = t1.index.at(identity_element(1).key());
    std::vector<CliffordElement> emb1, emb2;
    for (const auto& e : t1.group) {
      emb1.push_back(embed_local(e, 1));
      emb2.push_back(embed_local(e, 2));
    }

    t.decomp.reserve(t.group.size());
    // bare class representatives first so undressed elements decompose
    // to the canonical trains verbatim
    for (int r = 0; r < 4; ++r) {
      Decomp d;
      d.rep = r;
      d.l1 = d.l2 = d.r1 = d.r2 = static_cast<int16_t>(id1);
      t.decomp.try_emplace(reps[r].key(), d);
    }
    // full sweep over local dressings, tableau arithmetic only
    std::vector<CliffordElement> right(24 * 24, identity_element(2));
    for (int r1 = 0; r1 < 24; ++r1)
      for (int r2 = 0; r2 < 24; ++r2)
        compose_images(emb1[static_cast<size_t>(r1)],
                       emb2[static_cast<size_t>(r2)],
                       right[static_cast<size_t>(r1 * 24 + r2)]);
    CliffordElement er, full;
    er.n_qubits = full.n_qubits = 2;
    for (int r = 0; r < 4; ++r) {
      for (int r1 = 0; r1 < 24; ++r1)
        for (int r2 = 0; r2 < 24; ++r2) {
          compose_images(reps[r], right[static_cast<size_t>(r1 * 24 + r2)],
                         er);
          for (int l1 = 0; l1 < 24; ++l1)
            for (int l2 = 0; l2 < 24; ++l2) {
              compose_images(right[static_cast<size_t>(l1 * 24 + l2)], er,
                             full);
              Decomp d;
              d.rep = r;
              d.l1 = static_cast<int16_t>(l1);
              d.l2 = static_cast<int16_t>(l2);
              d.r1 = static_cast<int16_t>(r1);
              d.r2 = static_cast<int16_t>(r2);
              t.decomp.try_emplace(full.key(), d);
            }
        }
    }
    if (t.decomp.size() != t.group.size())
      throw std::logic_error("two-qubit decomposition table incomplete");
  });
  return t;
}

}  // namespace

PauliString pauli_mul(const PauliString& a, const PauliString& b) {
  PauliString r;
  r.n_qubits = a.n_qubits;
  r.phase = static_cast<uint8_t>((a.phase + b.phase) & 3);
  for (int j = 0; j < a.n_qubits; ++j) {
    r.op[j] = mul_op[a.op[j]][b.op[j]];
    r.phase = static_cast<uint8_t>((r.phase + mul_ph[a.op[j]][b.op[j]]) & 3);
  }
  return r;
}

Mat pauli_matrix(const PauliString& p) {
  Mat m = pauli2(p.op[0]);
  for (int j = 1; j < p.n_qubits; ++j) m = kron(m, pauli2(p.op[j]));
  static const cxd ipow[4] = {cxd(1, 0), cxd(0, 1), cxd(-1, 0), cxd(0, -1)};
  return ipow[p.phase & 3] * m;
}

uint32_t CliffordElement::key() const {
  uint32_t k = n_qubits == 2 ? (1u << 30) : 0u;
  int shift = 0;
  for (int g = 0; g < 2 * n_qubits; ++g) {
    const PauliString& p = images[g];
    for (int j = 0; j < n_qubits; ++j) {
      uint32_t x = (p.op[j] == 1 || p.op[j] == 2) ? 1u : 0u;
      uint32_t z = (p.op[j] == 2 || p.op[j] == 3) ? 1u : 0u;
      k |= x << shift++;
      k |= z << shift++;
    }
    k |= (p.phase == 2 ? 1u : 0u) << shift++;
  }
  return k;
}

PauliString clifford_act(const CliffordElement& c, const PauliString& p) {
  PauliString r;
  r.n_qubits = c.n_qubits;
  r.phase = p.phase;
  for (int j = 0; j < c.n_qubits; ++j) {
    switch (p.op[j]) {
      case 0: break;
      case 1: r = pauli_mul(r, c.images[2 * j]); break;
      case 3: r = pauli_mul(r, c.images[2 * j + 1]); break;
      default:  // Y = i X Z
        r.phase = static_cast<uint8_t>((r.phase + 1) & 3);
        r = pauli_mul(r, c.images[2 * j]);
        r = pauli_mul(r, c.images[2 * j + 1]);
        break;
    }
  }
  return r;
}

CliffordElement identity_clifford(int n_qubits) {
  return identity_element(n_qubits);
}

CliffordElement compose(const CliffordElement& a, const CliffordElement& b) {
  CliffordElement c;
  compose_images(a, b, c);
  c.unitary = a.unitary * b.unitary;
  return c;
}

CliffordElement inverse_element(const CliffordElement& a) {
  return tableau_from_unitary(Mat(a.unitary.adjoint()));
}

CliffordElement tableau_from_unitary(const Mat& u) {
  int dim = static_cast<int>(u.rows());
  int n = dim == 2 ? 1 : 2;
  if ((n == 1 && dim != 2) || (n == 2 && dim != 4) || u.cols() != dim)
    throw std::invalid_argument("unitary must be 2x2 or 4x4");
  CliffordElement e;
  e.n_qubits = n;
  e.unitary = u;
  int n_strings = n == 1 ? 4 : 16;
  for (int g = 0; g < 2 * n; ++g) {
    Mat v = u * pauli_matrix(generator_string(n, g)) * u.adjoint();
    bool found = false;
    for (int s = 1; s < n_strings && !found; ++s) {
      PauliString p;
      p.n_qubits = n;
      p.op[0] = static_cast<uint8_t>(s & 3);
      p.op[1] = static_cast<uint8_t>((s >> 2) & 3);
      cxd c = (pauli_matrix(p).adjoint() * v).trace() / double(dim);
      if (std::abs(c) < 0.5) continue;
      int k = static_cast<int>(std::lround(std::arg(c) / (pi / 2))) & 3;
      static const cxd ipow[4] = {cxd(1, 0), cxd(0, 1), cxd(-1, 0),
                                  cxd(0, -1)};
      if (std::abs(c - ipow[k]) > 1e-8 || (k != 0 && k != 2))
        throw std::invalid_argument("matrix is not a Clifford unitary");
      p.phase = static_cast<uint8_t>(k);
      e.images[g] = p;
      found = true;
    }
    if (!found) throw std::invalid_argument("matrix is not a Clifford unitary");
  }
  return e;
}

const std::vector<CliffordElement>& clifford_group(int n_qubits) {
  if (n_qubits == 1) return tables_1q().group;
  if (n_qubits == 2) return tables_2q().group;
  throw std::invalid_argument("only 1- and 2-qubit groups are supported");
}

CliffordElement sample_clifford(int n_qubits, std::mt19937_64& rng) {
  const auto& g = clifford_group(n_qubits);
  return g[uniform_index(rng, g.size())];
}

Mat sqrt_zz_unitary() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = cxd(0, 1);
  m(1, 1) = 1;
  m(2, 2) = 1;
  m(3, 3) = cxd(0, 1);
  return m;
}

const std::vector<NativeGate>& cnot_pulse_train() {
  static const std::vector<NativeGate> train = {
      {1, PulseKind::pi, PulsePhase::minus_x, false},
      {2, PulseKind::pi_half, PulsePhase::minus_y, false},
      {0, PulseKind::pi, PulsePhase::x, true},
      {1, PulseKind::pi_half, PulsePhase::minus_x, false},
      {2, PulseKind::pi_half, PulsePhase::y, false},
      {1, PulseKind::pi_half, PulsePhase::y, false},
      {2, PulseKind::pi_half, PulsePhase::x, false},
      {1, PulseKind::pi_half, PulsePhase::minus_x, false},
  };
  return train;
}

Mat native_gate_unitary(const NativeGate& g, int n_qubits) {
  if (g.entangling) {
    if (n_qubits != 2)
      throw std::invalid_argument("entangling gate needs two qubits");
    return sqrt_zz_unitary();
  }
  Mat u2 = rotation2(pulse_area(g.kind), phase_offset(g.phase));
  if (n_qubits == 1) return u2;
  return g.qubit == 1 ? kron(u2, ident(2)) : kron(ident(2), u2);
}

Mat native_word_unitary(const std::vector<NativeGate>& word, int n_qubits) {
  Mat u = ident(1 << n_qubits);
  for (const auto& g : word) u = native_gate_unitary(g, n_qubits) * u;
  return u;
}

std::vector<NativeGate> merge_single_qubit_runs(
    const std::vector<NativeGate>& word, int n_qubits) {
  (void)n_qubits;
  const auto& t1 = tables_1q();
  std::vector<NativeGate> out;
  std::vector<NativeGate> segment;  // between entangling barriers
  auto minimal_for = [&](const std::vector<NativeGate>& run, int q) {
    Mat u = ident(2);
    for (const auto& g : run) {
      NativeGate local = g;
      local.qubit = 1;
      u = native_gate_unitary(local, 1) * u;
    }
    int idx = t1.index.at(tableau_from_unitary(u).key());
    auto w = retarget(t1.words[static_cast<size_t>(idx)], q);
    return w;
  };
  auto flush_segment = [&] {
    if (segment.empty()) return;
    std::array<std::vector<NativeGate>, 2> run;
    for (const auto& g : segment)
      run[static_cast<size_t>(g.qubit - 1)].push_back(g);
    std::array<std::vector<NativeGate>, 2> best = run;
    bool shrank = false;
    for (int q = 1; q <= 2; ++q) {
      auto& r = run[static_cast<size_t>(q - 1)];
      if (r.size() < 2) continue;
      auto m = minimal_for(r, q);
      if (m.size() < r.size()) {
        best[static_cast<size_t>(q - 1)] = std::move(m);
        shrank = true;
      }
    }
    if (shrank) {
      // re-emit per qubit; gates on different qubits commute
      out.insert(out.end(), best[0].begin(), best[0].end());
      out.insert(out.end(), best[1].begin(), best[1].end());
    } else {
      out.insert(out.end(), segment.begin(), segment.end());
    }
    segment.clear();
  };
  for (const auto& g : word) {
    if (g.entangling) {
      flush_segment();
      out.push_back(g);
    } else {
      segment.push_back(g);
    }
  }
  flush_segment();
  return out;
}

std::vector<NativeGate> decompose_clifford(const CliffordElement& c) {
  if (c.n_qubits == 1) {
    const auto& t1 = tables_1q();
    auto it = t1.index.find(c.key());
    if (it == t1.index.end())
      throw std::logic_error("unknown single-qubit Clifford");
    return t1.words[static_cast<size_t>(it->second)];
  }
  const auto& t2 = tables_2q();
  const auto& t1 = tables_1q();
  auto it = t2.decomp.find(c.key());
  if (it == t2.decomp.end())
    throw std::logic_error("unknown two-qubit Clifford");
  const Decomp& d = it->second;
  std::vector<NativeGate> word;
  auto append = [&](const std::vector<NativeGate>& w) {
    word.insert(word.end(), w.begin(), w.end());
  };
  append(retarget(t1.words[static_cast<size_t>(d.r1)], 1));
  append(retarget(t1.words[static_cast<size_t>(d.r2)], 2));
  append(t2.rep_words[static_cast<size_t>(d.rep)]);
  append(retarget(t1.words[static_cast<size_t>(d.l1)], 1));
  append(retarget(t1.words[static_cast<size_t>(d.l2)], 2));
  word = merge_single_qubit_runs(word, 2);

  Mat w = native_word_unitary(word, 2);
  double fid = std::abs((w.adjoint() * c.unitary).trace()) / 4.0;
  if (fid < 1.0 - 1e-10)
    throw std::logic_error("native decomposition failed verification");
  return word;
}

GpcStats gate_counts(int n_qubits, long n_samples, uint64_t seed) {
  GpcStats s;
  s.samples = n_samples;
  auto rng = job_rng(seed, 0);
  long ones = 0, twos = 0;
  for (long i = 0; i < n_samples; ++i) {
    auto word = decompose_clifford(sample_clifford(n_qubits, rng));
    for (const auto& g : word) (g.entangling ? twos : ones)++;
  }
  s.gpc_1q = double(ones) / double(n_samples);
  s.gpc_2q = double(twos) / double(n_samples);
  return s;
}

}  // namespace nvreg
