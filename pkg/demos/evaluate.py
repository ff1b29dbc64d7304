"""
Scoring predictions against compression events
==============================================

Window predictions overlap several events; each event gets the
overlap-weighted mean of the windows that cover it.
"""

from cprfit import EvoConfig, SineFitter, SynthSpec, error_report, synthesize_recording, windows
from cprfit.evaluation import CompressionEvent, align
from cprfit.synth import cycle_events

spec = SynthSpec(freq_hz=1.75, amplitude_m=0.027, duration_s=30.0, seed=11)
events = [CompressionEvent(a, b, spec.ccf, spec.ccd) for a, b in cycle_events(spec)]
preds = list(SineFitter(EvoConfig(seed=2)).stream(windows(synthesize_recording(spec))))

aligned, uncovered = align(events, preds)
print(f"{len(aligned)} events aligned, {len(uncovered)} not covered by any window")

rep = error_report(aligned, n_uncovered=len(uncovered))
print("CCF:", rep.ccf.summary())
print("CCD:", rep.ccd.summary())

# Bland-Altman limits of agreement
print(f"CCF bias {rep.ccf.bias:+.2f} cpm, LoA [{rep.ccf.loa_low:.2f}, {rep.ccf.loa_high:.2f}]")
