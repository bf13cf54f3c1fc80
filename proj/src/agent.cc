#include "sdngame/agent.h"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sdngame/binary_io.h"

namespace sdngame {

namespace {
constexpr std::array<char, 4> kRandomMagic = {'S', 'D', 'R', 'A'};
}  // namespace

double EpsilonSchedule::At(std::int64_t step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

nn::Vector ToVector(const Observation& observation) {
  nn::Vector v(static_cast<Eigen::Index>(observation.size()));
  for (std::size_t i = 0; i < observation.size(); ++i) v(i) = observation[i];
  return v;
}

nn::Matrix ToMatrix(std::span<const Observation* const> observations) {
  if (observations.empty()) return {};
  nn::Matrix m(static_cast<Eigen::Index>(observations.front()->size()),
               static_cast<Eigen::Index>(observations.size()));
  for (std::size_t j = 0; j < observations.size(); ++j) {
    const Observation& obs = *observations[j];
    for (std::size_t i = 0; i < obs.size(); ++i) m(i, j) = obs[i];
  }
  return m;
}

int EpsilonGreedy(const nn::Vector& q, std::span<const int> legal, double epsilon,
                  std::mt19937_64& rng) {
  if (legal.empty()) throw std::invalid_argument("no legal actions to choose from");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
    return legal[pick(rng)];
  }
  int best = legal.front();
  for (int a : legal) {
    if (q(a) > q(best) || (q(a) == q(best) && a < best)) best = a;
  }
  return best;
}

TurnOutcome RandomAgent::ActAndLearn(const Observation& /*observation*/,
                                     std::span<const int> legal, const EnvStep& env_step) {
  if (legal.empty()) throw std::invalid_argument("no legal actions to choose from");
  std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
  return env_step(legal[pick(rng_)]);
}

void RandomAgent::Save(std::ostream& out) const {
  io::WriteMagic(out, kRandomMagic, 1);
  agent_io::WriteRng(out, rng_);
}

void RandomAgent::Load(std::istream& in) {
  io::ExpectMagic(in, kRandomMagic, 1);
  agent_io::ReadRng(in, rng_);
}

namespace agent_io {

void WriteRng(std::ostream& out, const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  const std::string s = text.str();
  io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void ReadRng(std::istream& in, std::mt19937_64& rng) {
  const auto size = io::Read<std::uint32_t>(in);
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (!in) throw io::FormatError("truncated rng state");
  std::istringstream text(s);
  text >> rng;
  if (!text) throw io::FormatError("bad rng state");
}

}  // namespace agent_io

}  // namespace sdngame
