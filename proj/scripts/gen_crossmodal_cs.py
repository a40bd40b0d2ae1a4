#!/usr/bin/env python3
"""Writes the CrossModal-CS manifest, knowledge base and keyword rule table.

The prose is authored here; the outcome structure (which tasks each arm gets
right, the dispatch plan, where rule keywords appear) is fixed by the tables
below and checked before anything is written.  Media files are produced
afterwards with `mma2a generate-media --manifest data/crossmodal_cs/manifest.json`.
"""

import argparse
import json
import re
import sys
from collections import Counter
from pathlib import Path

MARKER = "[fidelity=transcoded]"

RULES = [
    (("drop", "damage"), "deny_warranty"),
    (("liquid", "damage"), "deny_warranty"),
    (("expired",), "deny_warranty"),
    (("burn",), "escalate_to_specialist"),
    (("crack",), "initiate_replacement"),
    (("missing",), "order_part"),
    (("unopened",), "initiate_return"),
    (("error",), "troubleshoot_step"),
    (("blinking",), "troubleshoot_step"),
    (("step",), "provide_instructions"),
    (("height",), "provide_instructions"),
]
FALLBACK = "escalate_to_specialist"
VOCAB = {w for kws, _ in RULES for w in kws}

RULES_HEADER = """\
# Keyword rules for the heuristic decision step.
#
# One rule per line: keywords -> action.  A rule fires when every keyword
# appears as a whole word (case-insensitive) somewhere in the evidence
# summaries.  Rules are tried top to bottom and the first match wins; when
# nothing matches the decision is escalate_to_specialist.
#
# This table is authored for the shipped benchmark; it is not taken from any
# published system.
"""

PRODUCTS = [
    ("P01", "Aurora X2 smartphone", 24, "Covers manufacturing faults in the handset and battery.",
     ["impact or drop damage", "liquid ingress", "unauthorised repair"]),
    ("P02", "Breeze 300 blender", 24, "Covers motor, jar and control faults under household use.",
     ["commercial use", "dishwasher damage to the base"]),
    ("P03", "Nimbus convertible crib", 60, "Covers frame and hardware defects.",
     ["modification of the frame", "outdoor use"]),
    ("P04", "Orion desk lamp", 12, "Covers electrical and articulation faults.",
     ["bulb wear", "impact damage"]),
    ("P05", "Vega AX mesh router", 24, "Covers hardware faults; firmware support for five years.",
     ["power surge", "opened enclosure"]),
    ("P06", "Terra non-stick pan", 24, "Covers coating adhesion failures; coating claims are reviewed by a specialist.",
     ["metal utensil scoring", "overheating on an empty hob"]),
    ("P07", "Kestrel five-shelf bookcase", 36, "Covers panels and hardware.",
     ["overloading beyond 25 kg per shelf", "moisture swelling"]),
    ("P08", "Lumen colour smart bulb", 24, "Covers LED and radio module faults.",
     ["use in enclosed fixtures", "voltage outside rating"]),
    ("P09", "Halo wireless earbuds", 12, "Covers earbuds and charging case; battery swelling is a safety case.",
     ["sweat corrosion", "loss of one earbud"]),
    ("P10", "Summit dual-motor standing desk", 60, "Covers frame for 10 years, motors and controller for 5.",
     ["load above 120 kg", "third-party controller"]),
    ("P11", "Pixel Frame 10 tablet", 12, "Covers manufacturing faults.",
     ["screen breakage from pressure or impact", "liquid ingress"]),
    ("P12", "Cascade drip coffee maker", 24, "Covers heating and pump faults.",
     ["scale build-up", "commercial use"]),
    ("P13", "Atlas ergonomic office chair", 60, "Covers gas lift, frame and mechanism.",
     ["upholstery wear", "weight above 136 kg"]),
    ("P14", "Echo 5.1 soundbar", 24, "Covers speaker drivers, amplifier and remote.",
     ["wall mounting with non-supplied hardware", "power surge"]),
    ("P15", "Drift robot vacuum", 24, "Covers drive, suction and battery; thermal events go to a specialist.",
     ["hair tangles in brushes", "non-original batteries"]),
]

TROUBLESHOOTING = [
    ("T01", "router admin page reports WAN authentication fault", "troubleshoot_step"),
    ("T02", "smart bulb pulses three times and will not pair", "troubleshoot_step"),
    ("T03", "tablet stuck on boot logo after update", "troubleshoot_step"),
    ("T04", "robot vacuum side brush absent or broken", "order_part"),
    ("T05", "coffee maker descale light stays on", "troubleshoot_step"),
    ("T06", "standing desk controller shows reset code", "provide_instructions"),
    ("T07", "soundbar status light cycles and no audio", "troubleshoot_step"),
    ("T08", "earbuds firmware update fails in the app", "troubleshoot_step"),
    ("T09", "blender lid interlock tab broken", "order_part"),
    ("T10", "mesh node will not join during setup", "troubleshoot_step"),
]

FAILURE = {
    "policy": ("policy_lookup_failure", "reasoning"),
    "granularity": ("action_granularity_confusion", "reasoning"),
    "overconfident": ("overconfident_visual_grounding", "routing_x_reasoning"),
    "insufficient": ("insufficient_context", "routing"),
}

# ---------------------------------------------------------------------------
# Task content.  Field meanings:
#   gt            ground-truth action
#   mma / tbn     scripted decision when the synthesis step sees native /
#                 transcoded evidence
#   voice         list of transcripts (one WAV each)
#   image         list of captions (one PNG each)
#   v_sum/i_sum   what the voice / vision agent reports from native media
#   extra         additional text parts as (text, route_to)
#   image_to      destination of the image parts when not the vision agent
#   kw            (expected keywords with native evidence, with transcoded)
#   err           failure label key when the native arm is wrong
# Rule keywords may appear only in the primary agent's native summary and in
# the first primary-modality transcript or caption.

DEFECT = [
    dict(id="defect_001", product="P01", gt="deny_warranty", mma="deny_warranty", tbn="escalate_to_specialist",
         voice=["Hi, my Aurora phone stopped charging properly. It fell off the kitchen counter last week and now "
                "there's a faint rattle inside."],
         image=["Photo of a phone with drop damage near one corner."],
         msg="Order A-1001. I would like warranty service for my phone.",
         v_sum="Caller admits the handset fell from a counter; calm tone, moderate urgency; rattle and charging fault "
               "started after the fall.",
         i_sum="Physical impact damage consistent with a drop: dented corner, compressed frame beside the charging "
               "port, internal connector displaced.",
         structured={"vision": {"severity": "high", "cause": "impact"}, "voice": {"sentiment": "neutral", "urgency": "medium"}},
         extra=[("Customer note attached to the photo: taken in daylight on the day of the claim.", "vision")],
         kw=({"drop", "damage"}, {"drop", "damage"})),
    dict(id="defect_002", product="P02", gt="initiate_replacement", mma="initiate_replacement", tbn="escalate_to_specialist",
         voice=["The blender jar started leaking the second time I used it. Nothing unusual happened, I just made a "
                "smoothie."],
         image=["Blender jar with a crack at the base."],
         msg="Order A-1002. The jar leaks from underneath.",
         v_sum="Customer reports leakage from new jar under normal use; frustrated tone; no misuse described.",
         i_sum="Jar base shows a crack running from the blade collar through the moulding seam; seal compromised; "
               "looks like a moulding flaw.",
         structured={"vision": {"severity": "high", "cause": "manufacturing"}},
         extra=[("Customer note attached to the photo: jar photographed upside down on a towel.", "vision")],
         kw=({"crack"}, {"crack"})),
    dict(id="defect_003", product="P13", gt="order_part", mma="order_part", tbn="escalate_to_specialist",
         voice=["One of the armrests on my Atlas chair just came loose. The chair itself is fine, I still use it "
                "every day."],
         image=["Office chair with one armrest hanging loose."],
         msg="Order A-1003. Only the armrest is affected.",
         v_sum="Customer describes a single loose armrest; chair otherwise usable; low urgency.",
         i_sum="Armrest bracket sheared at the mounting plate; seat, base and gas lift intact; bracket is a "
               "separately stocked part.",
         structured={"vision": {"severity": "low", "component": "armrest bracket"}},
         extra=[("Customer note attached to the photo: the loose armrest is on the left side.", "vision")],
         kw=(set(), set())),
    dict(id="defect_004", product="P11", gt="deny_warranty", mma="deny_warranty", tbn="approve_warranty",
         voice=["My tablet screen is broken. I left it in my bag with some books and when I took it out the display "
                "was ruined."],
         image=["Tablet screen with a crack in one corner."],
         msg="Order A-1004. Asking for a free screen under warranty.",
         v_sum="Customer says the tablet was carried in a bag under heavy books before the fault appeared.",
         i_sum="Screen crack radiating from a single pressure point in the lower left; pattern typical of load "
               "from a heavy object, not a manufacturing fault.",
         structured={"vision": {"severity": "medium", "cause": "pressure"}},
         extra=[("Customer note attached to the photo: screen photographed with the device powered off.", "vision")],
         kw=({"crack"}, {"crack"})),
    dict(id="defect_005", product="P12", gt="initiate_replacement", mma="initiate_replacement", tbn="escalate_to_specialist",
         voice=["There's a smell of hot plastic every time the coffee maker runs and the bottom looks different now."],
         image=["Coffee maker, housing looks discoloured."],
         msg="Order A-1005. Unit is three months old.",
         v_sum="Customer reports a hot plastic smell during normal brewing; concerned tone; unit three months old.",
         i_sum="Heating plate warped and housing deformed next to the element; thermal fault inside the unit, "
               "not user caused.",
         structured={"vision": {"severity": "high", "cause": "thermal fault"}},
         kw=(set(), set())),
    dict(id="defect_006", product="P06", gt="escalate_to_specialist", mma="initiate_replacement", tbn="escalate_to_specialist",
         err="overconfident",
         voice=["The coating on my Terra pan is coming off in flakes. I only use wooden spoons."],
         image=["A frying pan with a worn cooking surface."],
         msg="Order A-1006. Coating problem.",
         v_sum="Customer reports coating loss despite using wooden utensils; calm tone.",
         i_sum="Non-stick coating peeling in wide flakes over a fine crack pattern in the base layer; adhesion "
               "failure across the whole cooking surface.",
         structured={"vision": {"severity": "high", "component": "coating"}},
         kw=({"crack"}, set())),
    dict(id="defect_007", product="P08", gt="approve_warranty", mma="approve_warranty", tbn="escalate_to_specialist",
         voice=["My smart bulb flickers and then turns off after a few minutes. It's in an open ceiling fitting."],
         image=["A smart bulb held in a hand."],
         msg="Order A-1007. Bulb bought in the spring.",
         v_sum="Customer describes intermittent shutdown in an open fitting, which is a supported installation.",
         i_sum="Seam in the bulb base is split along the factory weld; no scorching or misuse; within the "
               "covered fault profile.",
         structured={"vision": {"severity": "medium", "cause": "manufacturing"}},
         kw=(set(), set())),
    dict(id="defect_008", product="P15", gt="escalate_to_specialist", mma="initiate_replacement", tbn="approve_warranty",
         err="overconfident",
         voice=["My robot vacuum stopped mid clean and there was a strange smell. I unplugged the dock straight away."],
         image=["Robot vacuum underside with a crack in the battery cover."],
         msg="Order A-1008. I have not used it since.",
         v_sum="Customer reports a smell and sudden stop, then unplugged the dock; anxious tone, high urgency.",
         i_sum="Scorch and burn marks around the battery bay; melted plastic near the charging contacts.",
         structured={"vision": {"severity": "critical", "hazard": "thermal"}},
         kw=({"burn"}, {"crack"})),
    dict(id="defect_009", product="P09", gt="escalate_to_specialist", mma="initiate_replacement", tbn="deny_warranty",
         err="overconfident",
         voice=["The case for my Halo earbuds won't close any more.",
                "Also the left earbud looks a bit puffy compared with the right one."],
         image=["Earbuds in an open charging case."],
         msg="Order A-1009. Both issues started this week.",
         v_sum="Customer mentions the case no longer closes and that one earbud looks swollen; mild concern.",
         i_sum="Charging case hinge has a hairline crack; left earbud casing visibly swollen.",
         structured={"vision": {"severity": "high", "hazard": "battery swelling"}},
         kw=({"crack"}, set())),
    dict(id="defect_010", product="P14", gt="escalate_to_specialist", mma="initiate_replacement", tbn="approve_warranty",
         err="overconfident",
         voice=["The soundbar came off the wall bracket overnight and now one side sounds distorted."],
         image=["Soundbar on the floor with drop damage to the grille.", "Close view of the soundbar wall bracket."],
         msg="Order A-1010. It was mounted with the bracket from the box.",
         v_sum="Customer says the unit came off its supplied bracket overnight; distortion on one side since.",
         i_sum="Front grille shows a crack along the mounting edge; driver cone torn behind it; supplied bracket "
               "screws pulled out of the wall plugs.",
         structured={"vision": {"severity": "high", "component": "grille and driver"}},
         kw=({"crack"}, {"drop", "damage"})),
    dict(id="defect_011", product="P10", gt="order_part", mma="initiate_replacement", tbn="escalate_to_specialist",
         err="granularity",
         voice=["The keypad on my standing desk is broken. The desk goes up and down if I hold the button hard."],
         image=["Desk control keypad with a crack in its housing."],
         msg="Order A-1011. Desk frame is fine.",
         v_sum="Customer reports the keypad is damaged but the desk still moves; low urgency.",
         i_sum="Control keypad housing has a crack; lift columns and frame intact; keypad is a separately "
               "stocked part.",
         structured={"vision": {"severity": "low", "component": "keypad"}},
         kw=({"crack"}, {"crack"})),
    dict(id="defect_012", product="P04", gt="order_part", mma="initiate_replacement", tbn="escalate_to_specialist",
         err="granularity",
         voice=["My desk lamp won't stay up. The arm just sinks down slowly."],
         image=["A desk lamp with its arm drooping."],
         msg="Order A-1012. Light itself works.",
         v_sum="Customer reports the lamp arm sinks over time; light works; low urgency.",
         i_sum="Tension spring is missing from the elbow joint; shade, wiring and base are fine.",
         structured={"vision": {"severity": "low", "component": "tension spring"}},
         kw=({"missing"}, set())),
    dict(id="defect_013", product="P07", gt="order_part", mma="initiate_replacement", tbn="escalate_to_specialist",
         err="granularity",
         voice=["The bookcase is leaning and one shelf sags. It's been up for about a year."],
         image=["A bookshelf leaning slightly to one side."],
         msg="Order A-1013. Assembled following the leaflet.",
         v_sum="Customer reports leaning and a sagging shelf after a year of use.",
         i_sum="Side panel shows a crack at the shelf pin holes; one shelf support is bent; panel and supports "
               "are stocked parts.",
         structured={"vision": {"severity": "medium", "component": "side panel"}},
         kw=({"crack"}, set())),
]

VISUAL = [
    dict(id="visual_001", product="P05", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Router admin screen showing an error message."],
         msg="My internet dropped out and the router page shows this.",
         note="Device context: firmware 3.2.1, connected by cable to the fibre box.",
         i_sum="Admin page shows error E42 on the WAN link: authentication rejected by the provider.",
         kw=({"error"}, {"error"})),
    dict(id="visual_002", product="P08", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Smart bulb blinking on a ceiling fixture."],
         msg="The bulb won't show up in the app.",
         note="Device context: app version 5.4, hub in the same room.",
         i_sum="Bulb blinking in a triple pulse, the pairing timeout pattern.",
         kw=({"blinking"}, {"blinking"})),
    dict(id="visual_003", product="P11", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Tablet showing an error screen during start up."],
         msg="Tablet won't finish starting after last night's update.",
         note="Device context: update 14.2 installed overnight on battery.",
         i_sum="Boot screen shows update error 0x80 with a recovery prompt.",
         kw=({"error"}, {"error"})),
    dict(id="visual_004", product="P15", gt="order_part", mma="order_part", tbn="order_part",
         image=["Robot vacuum underside; a brush is missing.", "Robot vacuum sitting on its dock."],
         msg="The vacuum leaves dust along the skirting boards now.",
         note="Device context: vacuum runs daily on hard floors.",
         i_sum="Side brush is missing from its mount; drive wheels and main roller are clean.",
         kw=({"missing"}, {"missing"})),
    dict(id="visual_005", product="P12", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Coffee maker display showing an error code."],
         msg="Coffee maker stopped halfway through a brew.",
         note="Device context: hard water area, descaled two months ago.",
         i_sum="Display reads error C3, the pump prime fault.",
         kw=({"error"}, {"error"})),
    dict(id="visual_006", product="P10", gt="provide_instructions", mma="provide_instructions", tbn="provide_instructions",
         image=["Standing desk controller showing an error code."],
         msg="The desk controller shows a code after a power cut.",
         note="Device context: power cut yesterday evening.",
         i_sum="Controller shows error RST, which asks for the reset sequence after power loss.",
         kw=({"error"}, {"error"})),
    dict(id="visual_007", product="P14", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Soundbar with its status light blinking."],
         msg="No sound from the soundbar and the light keeps cycling.",
         note="Device context: connected to the TV over HDMI ARC.",
         i_sum="Status light blinking white then amber, the input handshake loop.",
         kw=({"blinking"}, {"blinking"})),
    dict(id="visual_008", product="P09", gt="troubleshoot_step", mma="troubleshoot_step", tbn="troubleshoot_step",
         image=["Phone screenshot of the earbuds app."],
         msg="The app keeps failing when I update the earbuds.",
         note="Device context: phone on the latest OS, earbuds in the case.",
         i_sum="Companion app shows firmware update error 0x1F at 40 percent.",
         kw=({"error"}, set())),
    dict(id="visual_009", product="P02", gt="order_part", mma="order_part", tbn="order_part",
         image=["Blender lid where the locking tab looks missing."],
         msg="Blender will not start with the lid on.",
         note="Device context: lid washed in the dishwasher.",
         i_sum="Lid locking tab has a crack so the safety interlock never engages.",
         kw=({"crack"}, {"missing"})),
    dict(id="visual_010", product="P05", gt="troubleshoot_step", mma="troubleshoot_step", tbn="escalate_to_specialist",
         image=["Router setup screen on a laptop."],
         msg="The second mesh unit won't join.",
         note="Device context: satellite unit placed two rooms away.",
         i_sum="Setup wizard stalled on the second step of mesh pairing; satellite signal weak.",
         kw=({"step"}, set())),
    dict(id="visual_011", product="P01", gt="troubleshoot_step", mma="troubleshoot_step", tbn="escalate_to_specialist",
         image=["Phone settings screen."],
         msg="No mobile signal since the update.",
         note="Device context: dual SIM, carrier profile installed last month.",
         i_sum="Settings show the carrier profile missing after the update; SIM detected.",
         kw=({"missing"}, set())),
    dict(id="visual_012", product="P04", gt="troubleshoot_step", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="insufficient",
         image=["A dark photo of a desk lamp."],
         msg="Lamp does not work.",
         note="Device context: none given.",
         i_sum="Photo too dark to read the indicator; lamp appears switched off.",
         kw=(set(), set())),
]

ASSEMBLY = [
    dict(id="assembly_001", product="P03", gt="provide_instructions", mma="provide_instructions", tbn="provide_instructions",
         voice=["I'm on step four and I can't tell which bolts go into the side rails."],
         msg="Building the Nimbus crib.",
         excerpt="Leaflet excerpt: attach the side rails using the long bolts from bag B.",
         v_sum="Customer is on step four of the crib frame and asks which bolts fit the side rails; patient tone.",
         kw=({"step"}, {"step"})),
    dict(id="assembly_002", product="P03", gt="provide_instructions", mma="provide_instructions", tbn="provide_instructions",
         voice=["How do I set the mattress height to the lowest position?"],
         msg="Baby is starting to stand.",
         excerpt="Leaflet excerpt: the mattress base has three positions.",
         v_sum="Customer asks how to lower the mattress height now the baby stands; clear intent.",
         kw=({"height"}, {"height"})),
    dict(id="assembly_003", product="P03", gt="provide_instructions", mma="provide_instructions", tbn="escalate_to_specialist",
         voice=["Uh, how do I change the mat raise settings on the, um, nimbus thing?"],
         msg="Question about the crib.",
         excerpt="Leaflet excerpt: base positions are set with the four corner pins.",
         v_sum="Customer asks about the mattress height settings on the Nimbus crib; product identified from the "
               "spoken model name.",
         kw=({"height"}, set())),
    dict(id="assembly_004", product="P07", gt="provide_instructions", mma="provide_instructions", tbn="provide_instructions",
         voice=["Which step has the back panel? I've done the sides."],
         msg="Kestrel bookcase, sides done.",
         excerpt="Leaflet excerpt: slide the back panel into the grooves before fixing the top.",
         v_sum="Customer finished the sides and asks which step fits the back panel.",
         kw=({"step"}, {"step"})),
    dict(id="assembly_005", product="P10", gt="provide_instructions", mma="provide_instructions", tbn="provide_instructions",
         voice=["The crossbar doesn't line up with the legs.", "Should the feet go on before or after the crossbar?"],
         msg="Summit desk frame assembly.",
         excerpt="Leaflet excerpt: fit the feet first, then the crossbar.",
         v_sum="Customer is fitting the frame and asks about the order of feet and crossbar.",
         kw=(set(), set())),
    dict(id="assembly_006", product="P13", gt="order_part", mma="order_part", tbn="order_part",
         voice=["There's a screw missing from the pack, I only have five for the seat plate."],
         msg="Atlas chair hardware pack.",
         excerpt="Leaflet excerpt: the seat plate uses six M8 screws.",
         v_sum="Customer found a screw missing from the hardware pack; needs six, has five.",
         kw=({"missing"}, {"missing"})),
    dict(id="assembly_007", product="P10", gt="provide_instructions", mma="provide_instructions", tbn="escalate_to_specialist",
         voice=["Which step attaches the control box? It beeps when I plug it in."],
         msg="Summit desk wiring.",
         excerpt="Leaflet excerpt: connect the motor cables before the power lead.",
         v_sum="Customer hears the control box error chime while wiring the frame and asks where the box mounts.",
         kw=({"error"}, {"step"})),
    dict(id="assembly_008", product="P10", gt="provide_instructions", mma="troubleshoot_step", tbn="escalate_to_specialist",
         err="granularity",
         voice=["The display flashes a code after I connected the legs, what did I do wrong?"],
         msg="Desk assembly question.",
         excerpt="Leaflet excerpt: run the first calibration with the desk unloaded.",
         v_sum="Customer sees an error code right after connecting the legs and asks what went wrong.",
         kw=({"error"}, set())),
    dict(id="assembly_009", product="P14", gt="provide_instructions", mma="troubleshoot_step", tbn="escalate_to_specialist",
         err="granularity",
         voice=["When I put the soundbar on the bracket it says error on the front."],
         msg="Mounting the soundbar.",
         excerpt="Leaflet excerpt: use the supplied spacers on uneven walls.",
         v_sum="Customer mounting the soundbar reads an error on the front panel once it sits on the bracket.",
         kw=({"error"}, {"error"})),
    dict(id="assembly_010", product="P07", gt="provide_instructions", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="insufficient",
         voice=["Is it okay if it wobbles a bit?"],
         msg="Bookcase question.",
         excerpt="Leaflet excerpt: fix the anti-tip strap to the wall.",
         v_sum="Customer asks whether some wobble is acceptable; no detail on which part moves.",
         kw=(set(), set())),
    dict(id="assembly_011", product="P03", gt="order_part", mma="initiate_replacement", tbn="escalate_to_specialist",
         err="granularity",
         voice=["For the step with the base, one of the corner pins snapped in my hand."],
         msg="Crib base pins.",
         excerpt="Leaflet excerpt: corner pins click into the base at each position.",
         v_sum="Customer is on the base step and reports a corner pin snapped; everything else assembled.",
         kw=({"step"}, {"step"})),
    dict(id="assembly_012", product="P13", gt="provide_instructions", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="insufficient",
         voice=["It doesn't feel right."],
         msg="Chair.",
         excerpt="Leaflet excerpt: tighten the backrest knob fully before use.",
         v_sum="Customer says the chair does not feel right without saying which part; unclear request.",
         kw=(set(), set())),
]

WARRANTY = [
    dict(id="warranty_001", product="P06", gt="escalate_to_specialist", mma="escalate_to_specialist",
         tbn="escalate_to_specialist",
         voice=["My pan coating is lifting after eight months. I'd like it looked at."],
         image=["Photo of a printed receipt for a Terra pan."],
         msg="Claim for the Terra pan.",
         v_sum="Customer requests a coating claim at eight months; coating claims are reviewed by a specialist.",
         kw=(set(), set())),
    dict(id="warranty_002", product="P12", gt="approve_warranty", mma="approve_warranty", tbn="escalate_to_specialist",
         voice=["The coffee maker pump stopped after ten months, I registered it when I bought it."],
         image=["Photo of a store receipt for a Cascade coffee maker."],
         msg="Claim for the Cascade coffee maker.",
         order="Order record: purchased 10 months ago, registered, no prior claims.",
         v_sum="Customer reports a pump fault at ten months on a registered unit.",
         kw=(set(), set())),
    dict(id="warranty_003", product="P11", gt="deny_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["I bought the tablet three years ago, I know the warranty has expired but can you help?"],
         image=["Photo of an online order confirmation for a tablet."],
         msg="Tablet claim.",
         order="Order record: purchased 37 months ago.",
         v_sum="Customer says the purchase was three years ago and accepts the cover has expired.",
         kw=({"expired"}, {"expired"})),
    dict(id="warranty_004", product="P05", gt="approve_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["My router keeps rebooting, it's about a year old."],
         image=["Photo of a receipt for a Vega router."],
         msg="Router claim.",
         order="Order record: purchased 13 months ago, two-year cover.",
         v_sum="Customer reports repeated reboots on a thirteen month old router.",
         kw=(set(), set())),
    dict(id="warranty_005", product="P01", gt="deny_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["My phone got wet at the beach and now it won't turn on."],
         image=["Photo of a receipt for an Aurora phone."],
         msg="Phone claim.",
         order="Order record: purchased 5 months ago.",
         v_sum="Customer says the phone got wet at the beach and will not power on.",
         kw=(set(), set())),
    dict(id="warranty_006", product="P13", gt="approve_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["The gas lift on my chair sinks all the time, it's two years old."],
         image=["Photo of an invoice for an Atlas chair."],
         msg="Chair claim.",
         order="Order record: purchased 26 months ago, five-year cover.",
         v_sum="Customer reports the gas lift sinking on a two year old chair.",
         kw=(set(), set())),
    dict(id="warranty_007", product="P02", gt="deny_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["I have an unopened blender I'd like to send back, it was a gift last year."],
         image=["Photo of a gift receipt for a blender."],
         msg="Blender claim.",
         order="Order record: purchased 14 months ago as a gift.",
         v_sum="Customer wants to send back an unopened blender received as a gift over a year ago.",
         kw=({"unopened"}, {"unopened"})),
    dict(id="warranty_008", product="P09", gt="approve_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["The right earbud doesn't charge, I've had them for six months."],
         image=["Photo of a receipt for Halo earbuds."],
         msg="Earbuds claim.",
         order="Order record: purchased 6 months ago.",
         v_sum="Customer reports one earbud not charging at six months.",
         kw=(set(), set())),
    dict(id="warranty_009", product="P04", gt="deny_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["The lamp bulb burned out, can I get it replaced under warranty?"],
         image=["Photo of a receipt for an Orion lamp."],
         msg="Lamp claim.",
         order="Order record: purchased 4 months ago.",
         v_sum="Customer asks for a replacement bulb under warranty after normal bulb wear.",
         kw=(set(), set())),
    dict(id="warranty_010", product="P10", gt="approve_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["One motor in the desk stopped, the other one still works, it's three years old."],
         image=["Photo of an invoice for a Summit desk."],
         msg="Desk claim.",
         order="Order record: purchased 36 months ago, motors covered five years.",
         v_sum="Customer reports one lift motor failed at three years.",
         kw=(set(), set())),
    dict(id="warranty_011", product="P08", gt="initiate_return", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["I bought the bulbs two weeks ago and never used them, I'd like to return them please."],
         image=["Photo of a receipt for smart bulbs."],
         msg="Bulb return.",
         order="Order record: purchased 14 days ago, within the return window.",
         v_sum="Customer wants to return bulbs bought two weeks ago; the offer they saw has expired.",
         kw=({"expired"}, set())),
    dict(id="warranty_012", product="P14", gt="deny_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy",
         voice=["The soundbar died after a thunderstorm."],
         image=["Photo of a receipt for an Echo soundbar."],
         msg="Soundbar claim.",
         v_sum="Customer reports the soundbar failed after a thunderstorm, a power surge event.",
         kw=(set(), set())),
    dict(id="warranty_013", product="P15", gt="approve_warranty", mma="escalate_to_specialist", tbn="escalate_to_specialist",
         err="policy", primary="vision",
         voice=["The vacuum's wheel stopped turning after a few weeks."],
         image=["Robot vacuum turned over on a table."],
         msg="Vacuum claim.",
         v_sum="Customer reports the drive wheel stopped after a few weeks of use.",
         i_sum="Drive wheel hub shows drop damage and a seized axle.",
         kw=({"drop", "damage"}, set())),
]

CATEGORIES = [
    ("product_defect", DEFECT, 3),
    ("assembly_guidance", ASSEMBLY, 1),
    ("visual_troubleshooting", VISUAL, 2),
    ("warranty_claim", WARRANTY, 2),
]


def tokens(text):
    return re.findall(r"[a-z0-9]+", text.lower())


def keywords(text):
    return set(tokens(text)) & VOCAB


def rule_decision(kw):
    for i, (needed, action) in enumerate(RULES):
        if set(needed) <= kw:
            return action, "rule %d:%s" % (i + 1, "".join(" " + k for k in needed))
    return FALLBACK, "no rule matched"


def media_name(task_id, kind, i):
    ext = "wav" if kind == "voice" else "png"
    return "media/%s_%s%d.%s" % (task_id, kind, i + 1, ext)


def build_task(category, spec, base_priority):
    tid = spec["id"]
    n = int(tid.rsplit("_", 1)[1])
    parts = []
    for i, t in enumerate(spec.get("voice", [])):
        parts.append({"kind": "file", "mimeType": "audio/wav", "media": media_name(tid, "voice", i), "transcript": t})
    image_to = None
    if category == "warranty_claim" and n <= 12:
        image_to = "text"  # receipt photos go to the policy agent
    for i, c in enumerate(spec.get("image", [])):
        p = {"kind": "file", "mimeType": "image/png", "media": media_name(tid, "image", i), "caption": c}
        if image_to:
            p["route_to"] = image_to
        parts.append(p)
    parts.append({"kind": "text", "text": spec["msg"]})
    if "order" in spec:
        parts.append({"kind": "text", "text": spec["order"]})
    if "excerpt" in spec:
        parts.append({"kind": "text", "text": spec["excerpt"], "route_to": "voice"})
    if "note" in spec:
        parts.append({"kind": "text", "text": spec["note"], "route_to": "vision"})
    for text, dest in spec.get("extra", []):
        parts.append({"kind": "text", "text": text, "route_to": dest})

    native = {}
    if "v_sum" in spec:
        native["voice"] = spec["v_sum"]
    if "i_sum" in spec:
        native["vision"] = spec["i_sum"]

    has_voice = bool(spec.get("voice"))
    has_vision = bool(spec.get("image")) and image_to is None
    def key(fid):
        return "%s|%s" % (fid if has_voice else "n/a", fid if has_vision else "n/a")

    task = {
        "task_id": tid,
        "category": category,
        "priority": base_priority + (n % 2),
        "product_id": spec["product"],
        "ground_truth": spec["gt"],
        "parts": parts,
        "fixtures": {
            "native_summary": native,
            "scripted_decision": {key("native"): spec["mma"], key("transcoded"): spec["tbn"]},
        },
    }
    if "structured" in spec:
        task["fixtures"]["structured"] = spec["structured"]
    if "err" in spec:
        mode, layer = FAILURE[spec["err"]]
        task["error_label"] = {"failure_mode": mode, "layer": layer}
    return task


def primary_agent(category, spec):
    if "primary" in spec:
        return spec["primary"]
    return "voice" if category in ("assembly_guidance", "warranty_claim") else "vision"


def check(tasks_by_cat):
    problems = []
    table = Counter()
    per_cat = {}
    kw_correct = Counter()
    identical = 0
    routing = {"native": Counter(), "text_bottleneck": Counter()}
    labels = Counter()

    for category, specs, _ in tasks_by_cat:
        counts = Counter()
        for spec in specs:
            tid = spec["id"]
            n = int(tid.rsplit("_", 1)[1])
            m_ok = spec["mma"] == spec["gt"]
            t_ok = spec["tbn"] == spec["gt"]
            cell = "a" if m_ok and t_ok else "b" if m_ok else "c" if t_ok else "d"
            table[cell] += 1
            counts["mma"] += m_ok
            counts["tbn"] += t_ok
            if not m_ok:
                if "err" not in spec:
                    problems.append(tid + ": native arm wrong but no error label")
                else:
                    labels[spec["err"]] += 1
            elif "err" in spec:
                problems.append(tid + ": error label on a correct task")

            # keyword placement
            prim = primary_agent(category, spec)
            prim_media = spec["voice"] if prim == "voice" else spec["image"]
            prim_sum = spec["v_sum"] if prim == "voice" else spec["i_sum"]
            want_native, want_tbn = spec["kw"]
            if keywords(prim_sum) != want_native:
                problems.append("%s: native summary keywords %s != %s" % (tid, keywords(prim_sum), want_native))
            if keywords(prim_media[0]) != want_tbn:
                problems.append("%s: first %s text keywords %s != %s" % (tid, prim, keywords(prim_media[0]), want_tbn))
            others = [spec["msg"], spec.get("order", ""), spec.get("excerpt", ""), spec.get("note", "")]
            others += [t for t, _ in spec.get("extra", [])]
            others += prim_media[1:]
            other_media = spec.get("image", []) if prim == "voice" else spec.get("voice", [])
            others += other_media
            other_sum = spec.get("i_sum" if prim == "voice" else "v_sum", "")
            others.append(other_sum)
            for text in others:
                if keywords(text):
                    problems.append("%s: stray rule keywords %s in %r" % (tid, keywords(text), text))

            nat, why_n = rule_decision(want_native)
            tbn, why_t = rule_decision(want_tbn)
            kw_correct["mma"] += nat == spec["gt"]
            kw_correct["tbn"] += tbn == spec["gt"]
            identical += (nat, why_n) == (tbn, why_t)

            # routing decisions per arm (native-capable media only reaches its agent)
            img_to_text = category == "warranty_claim" and n <= 12
            for mode in ("native", "text_bottleneck"):
                r = routing[mode]
                for _ in spec.get("voice", []):
                    r["voice_native" if mode == "native" else "voice_transcoded"] += 1
                for _ in spec.get("image", []):
                    r["image_native" if mode == "native" and not img_to_text else "image_transcoded"] += 1
                r["text_native"] += 1 + ("order" in spec) + 1  # message, order record, evidence digest
                r["text_transcoded"] += ("excerpt" in spec) + ("note" in spec) + len(spec.get("extra", []))
        per_cat[category] = (len(specs), counts["mma"], counts["tbn"])

    expect = {
        "table": {"a": 15, "b": 11, "c": 1, "d": 23},
        "per_cat": {"product_defect": (13, 6, 1), "assembly_guidance": (12, 7, 5),
                    "visual_troubleshooting": (12, 11, 9), "warranty_claim": (13, 2, 1)},
        "kw": (18, 18), "identical": 35,
        "labels": {"policy": 11, "granularity": 6, "overconfident": 4, "insufficient": 3},
        "native": {"voice_native": 40, "image_native": 28, "image_transcoded": 12, "text_native": 110,
                   "text_transcoded": 28},
        "text_bottleneck": {"voice_transcoded": 40, "image_transcoded": 40, "text_native": 110,
                            "text_transcoded": 28},
    }
    if dict(table) != expect["table"]:
        problems.append("contingency %s" % dict(table))
    if per_cat != expect["per_cat"]:
        problems.append("per-category %s" % per_cat)
    if (kw_correct["mma"], kw_correct["tbn"]) != expect["kw"]:
        problems.append("keyword correct %s" % dict(kw_correct))
    if identical != expect["identical"]:
        problems.append("identical keyword responses %d" % identical)
    if dict(labels) != expect["labels"]:
        problems.append("labels %s" % dict(labels))
    for mode in ("native", "text_bottleneck"):
        if dict(routing[mode]) != expect[mode]:
            problems.append("%s routing %s" % (mode, dict(routing[mode])))
    return problems


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "crossmodal_cs"))
    ap.add_argument("--check-only", action="store_true")
    args = ap.parse_args()

    problems = check(CATEGORIES)
    if problems:
        for p in problems:
            print("plan check failed:", p, file=sys.stderr)
        return 1
    if args.check_only:
        print("plan checks passed")
        return 0

    out = Path(args.out)
    (out / "media").mkdir(parents=True, exist_ok=True)
    tasks = [build_task(cat, spec, prio) for cat, specs, prio in CATEGORIES for spec in specs]
    manifest = {
        "schema_version": 1,
        "name": "crossmodal-cs",
        "description": "50 cross-modal customer-service tasks in four categories.",
        "knowledge_base": "kb.json",
        "keyword_rules": "keyword_rules.txt",
        "tasks": tasks,
    }
    kb = {
        "schema_version": 1,
        "products": [
            {"product_id": pid, "name": name, "warranty_months": months, "warranty_terms": terms, "exclusions": excl}
            for pid, name, months, terms, excl in PRODUCTS
        ],
        "troubleshooting": [
            {"entry_id": eid, "symptom": sym, "resolution": res} for eid, sym, res in TROUBLESHOOTING
        ],
    }
    rules = RULES_HEADER + "\n" + "".join("%-16s -> %s\n" % (" ".join(kws), act) for kws, act in RULES)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")
    (out / "kb.json").write_text(json.dumps(kb, indent=2, ensure_ascii=False) + "\n")
    (out / "keyword_rules.txt").write_text(rules)
    print("wrote %d tasks to %s" % (len(tasks), out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
