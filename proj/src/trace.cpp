#include "adrsim/trace.hpp"

#include <cstdio>
#include <ostream>

namespace adrsim {

std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::uplink: return "uplink";
    case RecordKind::downlink: return "downlink";
    case RecordKind::downlink_dropped: return "downlink_dropped";
    case RecordKind::adr_step: return "adr_step";
    case RecordKind::adr_command: return "adr_command";
    case RecordKind::net_command: return "net_command";
    case RecordKind::link_change: return "link_change";
    case RecordKind::device_arrival: return "device_arrival";
  }
  return "unknown";
}

void write_trace_csv(const RunTrace& trace, std::ostream& os) {
  os << "time,kind,device,fcnt,attempt,start,airtime,sf,tp,channel,value,snr,outcome,flags\n";
  char buf[512];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%u,%u,%u,%.17g,%.17g,%u,%d,%u,%.17g,%.17g,%s,%u\n",
                  r.time_s, to_string(r.kind).c_str(), r.device, r.fcnt, unsigned{r.attempt},
                  r.start_s, r.airtime_s, unsigned{r.sf}, int{r.tp_dbm}, unsigned{r.channel},
                  r.value, r.snr_db, phy::to_string(r.reason).c_str(), unsigned{r.flags});
    os << buf;
  }
}

}  // namespace adrsim
