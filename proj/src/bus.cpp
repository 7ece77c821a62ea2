#include "mrnav/bus.hpp"

#include <algorithm>

namespace mrnav {

void Bus::send(int sender, int receiver, BusPayload payload, double now,
               std::mt19937_64& rng) {
  ++sent_;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double roll = unit(rng);
  std::uniform_real_distribution<double> delay(delay_low_, delay_high_);
  const double d = (delay_high_ > delay_low_) ? delay(rng) : delay_low_;
  if (roll < drop_probability_) {
    ++dropped_;
    return;
  }
  BusMessage msg;
  msg.sender = sender;
  msg.receiver = receiver;
  msg.payload = std::move(payload);
  msg.send_time = now;
  msg.deliver_time = now + d;
  msg.sequence = sequence_++;
  queue_.push_back(std::move(msg));
}

void Bus::broadcast(int sender, std::span<const int> receivers,
                    const BusPayload& payload, double now,
                    std::mt19937_64& rng) {
  for (int r : receivers) {
    if (r == sender) continue;
    send(sender, r, payload, now, rng);
  }
}

std::vector<BusMessage> Bus::poll(int receiver, double now) {
  std::vector<BusMessage> out;
  for (auto it = queue_.begin(); it != queue_.end();) {
    if (it->receiver == receiver && it->deliver_time <= now) {
      out.push_back(std::move(*it));
      it = queue_.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(out.begin(), out.end(), [](const BusMessage& a, const BusMessage& b) {
    return std::tie(a.deliver_time, a.sequence) <
           std::tie(b.deliver_time, b.sequence);
  });
  return out;
}

}  // namespace mrnav
