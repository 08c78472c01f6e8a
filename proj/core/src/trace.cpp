#include "crmsim/trace.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace crmsim {

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::tx_start: return "tx_start";
    case TraceKind::tx_end: return "tx_end";
    case TraceKind::rx_ok: return "rx_ok";
    case TraceKind::rx_collision: return "rx_collision";
    case TraceKind::backoff_enter: return "backoff_enter";
    case TraceKind::cts_timeout: return "cts_timeout";
    case TraceKind::ack_timeout: return "ack_timeout";
    case TraceKind::drop_buffer: return "drop_buffer";
    case TraceKind::drop_retry: return "drop_retry";
    case TraceKind::deliver_final: return "deliver_final";
    case TraceKind::reservation_placed: return "reservation_placed";
    case TraceKind::reservation_heard: return "reservation_heard";
    case TraceKind::reservation_own_start: return "reservation_own_start";
    case TraceKind::sleep_start: return "sleep_start";
    case TraceKind::wake: return "wake";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

namespace {

void write_record(std::ostream& out, const TraceRecord& r) {
  out << r.t << ' ' << trace_kind_name(r.kind) << " n=" << r.node;
  if (r.peer != kNoNode) out << " peer=" << r.peer;
  if (r.frame >= 0) out << " fk=" << r.frame;
  out << " a=" << r.a << " b=" << r.b << " c=" << r.c;
  if (r.x != 0.0) out << " x=" << format_double(r.x);
  out << '\n';
}

}  // namespace

void Trace::serialize(std::ostream& out) const {
  for (const TraceRecord& r : records_) write_record(out, r);
  const RunCounters& c = counters_;
  out << "# duration_us=" << duration_us_ << '\n';
  out << "# counters generated=" << c.generated << " delivered=" << c.delivered
      << " drop_buffer=" << c.drops_buffer << " drop_retry=" << c.drops_retry
      << " collisions=" << c.collisions << " rsi_mpdus=" << c.rsi_mpdus
      << " rsi_bytes=" << c.rsi_bytes << " reserved_us=" << c.reserved_us
      << " reserved_used_us=" << c.reserved_used_us
      << " soundness_violations=" << c.soundness_violations << '\n';
  for (std::size_t i = 0; i < energy_.size(); ++i) {
    out << "# energy n=" << i << " tx=" << energy_[i].tx_us << " rx=" << energy_[i].rx_listen_us
        << " sleep=" << energy_[i].sleep_us << '\n';
  }
  for (std::size_t i = 0; i < residual_.size(); ++i) {
    out << "# residual n=" << i << " packets=" << residual_[i] << '\n';
  }
}

std::uint64_t Trace::hash() const {
  std::ostringstream os;
  serialize(os);
  const std::string s = os.str();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace crmsim
