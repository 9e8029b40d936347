//! Walk the UE sleep-schedule state machine by hand and print the timeline
//! of a packet that arrives while DRX is enabled.

use coalesced_drx::drx::{advance, DrxConfig, DrxEvent, UeState};

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let arrival = 70.0;
    let mut s = UeState::drx_enabled_at(0.0);
    let log = |t: f64, ev: DrxEvent, s: &UeState| {
        println!("{t:>7.1} ms  {:<18} -> {:?} (cycle {}, next {:.1})", format!("{ev:?}"), s.mode, s.cycle_index, s.next_event_at)
    };
    // sleep until the on-duration that follows the arrival
    loop {
        let t = s.next_event_at;
        let ev = s.timer_event().expect("DRX timers are pending");
        s = advance(s, ev, t, &cfg)?;
        log(t, ev, &s);
        if ev == DrxEvent::OnDurationStart && t >= arrival {
            break;
        }
    }
    let start = s.next_event_at - cfg.t_on;
    s = advance(s, DrxEvent::ReleaseTriggered, start, &cfg)?;
    log(start, DrxEvent::ReleaseTriggered, &s);
    let end = start + 1.0;
    s = advance(s, DrxEvent::QueueDrained, end, &cfg)?;
    log(end, DrxEvent::QueueDrained, &s);
    let t = s.next_event_at;
    s = advance(s, DrxEvent::InactivityExpiry, t, &cfg)?;
    log(t, DrxEvent::InactivityExpiry, &s);
    println!("packet arrived at {arrival} ms, waited {:.1} ms", start - arrival);
    Ok(())
}
