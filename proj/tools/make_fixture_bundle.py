#!/usr/bin/env python3
"""Regenerates the demo fixture bundle (fixtures/demo).

Two small worlds share one bundle:
  * a 300 m walk north on Westlake Ave N used by route preview
  * a hand-built panorama graph around Russell St in Greenpoint used by
    exploration

Tiles are tiny solid PNGs; only their names matter to the scripted model.
"""

import argparse
import hashlib
import json
import math
import shutil
from pathlib import Path

from PIL import Image

R = 6371000.0
M_PER_DEG = R * math.pi / 180.0


def north(lat, lon, dn, de=0.0):
    """Offset a point by dn metres north and de metres east (small distances)."""
    return (lat + dn / M_PER_DEG, lon + de / (M_PER_DEG * math.cos(math.radians(lat))))


def coord(p):
    return {"lat": round(p[0], 7), "lon": round(p[1], 7)}


def link(heading, target, street=""):
    out = {"heading": heading, "target": target}
    if street:
        out["street_name"] = street
    return out


def pano(pid, p, links, date="2024-06"):
    return {"id": pid, "coord": coord(p), "capture_date": date, "links": links}


def place(name, category, p):
    return {"name": name, "category": category, "coord": coord(p)}


def triple(short, medium, long):
    return {"long_description": long, "medium_description": medium, "short_description": short}


# ---------------------------------------------------------------- Westlake
WL_LAT, WL_LON = 47.6209000, -122.3383000
WL_STEP = 37.5  # 300 m split into 8 equal gaps
WL_EAST = 2.0   # panoramas sit a couple of metres east of the centreline


def westlake():
    panos, places, script = [], [], {}
    start = (WL_LAT, WL_LON)
    end = north(WL_LAT, WL_LON, 300.0)
    wl = [north(WL_LAT, WL_LON, k * WL_STEP, WL_EAST) for k in range(9)]

    for k in range(9):
        links = []
        if k < 8:
            links.append(link(0, f"wl{k+1}", "Westlake Ave N"))
        if k > 0:
            links.append(link(180, f"wl{k-1}", "Westlake Ave N"))
        if k == 0:
            links += [link(90, "wl0e", "Thomas St"), link(270, "wl0w", "Thomas St"), link(180, "wl0s", "Westlake Ave N")]
        if k == 4:
            links += [link(90, "wl4e", "Harrison St"), link(270, "wl4w", "Harrison St")]
        panos.append(pano(f"wl{k}", wl[k], links))
    panos += [
        pano("wl0e", north(WL_LAT, WL_LON, 0, 40), [link(270, "wl0", "Thomas St")]),
        pano("wl0w", north(WL_LAT, WL_LON, 0, -40), [link(90, "wl0", "Thomas St")]),
        pano("wl0s", north(WL_LAT, WL_LON, -37.5, WL_EAST), [link(0, "wl0", "Westlake Ave N")]),
        pano("wl4e", north(WL_LAT, WL_LON, 150, 40), [link(270, "wl4", "Harrison St")]),
        pano("wl4w", north(WL_LAT, WL_LON, 150, -40), [link(90, "wl4", "Harrison St")]),
    ]

    stop = north(WL_LAT, WL_LON, 303.0, 6.0)
    places += [
        place("Westlake & Mercer Stop", "bus stop", stop),
        place("Thomas Street Mini Mart", "convenience store", north(WL_LAT, WL_LON, 12, -18)),
        place("Cascade Print Shop", "print shop", north(WL_LAT, WL_LON, 20, 22)),
        place("Lakefront Noodle Bar", "restaurant", north(WL_LAT, WL_LON, 60, -20)),
        place("Westlake Dental Studio", "dentist", north(WL_LAT, WL_LON, 95, 20)),
        place("Harrison Street Garage", "parking garage", north(WL_LAT, WL_LON, 150, 35)),
        place("South Lake Bicycle Co.", "bicycle shop", north(WL_LAT, WL_LON, 170, -22)),
        place("Denny Triangle Pharmacy", "pharmacy", north(WL_LAT, WL_LON, 205, 18)),
        place("Union Bay Coffee", "cafe", north(WL_LAT, WL_LON, 240, -16)),
        place("Mercer Fitness Loft", "gym", north(WL_LAT, WL_LON, 270, 24)),
        place("Northgate Pet Supply", "pet store", north(WL_LAT, WL_LON, 290, -25)),
        place("Streetcar Flowers", "florist", north(WL_LAT, WL_LON, 320, 15)),
    ]

    route = {
        "polyline": [coord(start), coord(north(WL_LAT, WL_LON, 150.0)), coord(end)],
        "steps": [
            {"maneuver": "Depart", "location": coord(start), "street_name": "Westlake Ave N"},
            {"maneuver": "CrossIntersection", "location": coord(north(WL_LAT, WL_LON, 150.0)), "street_name": "Harrison St"},
            {"maneuver": "Arrive", "location": coord(end), "street_name": "Westlake Ave N"},
        ],
    }
    routes = [
        {"origin": coord(start), "destination": coord(end), "route": route},
        # Destination in the lake: no walking route.
        {"origin": coord(start), "destination": {"lat": 47.6330, "lon": -122.3370}, "unavailable": True},
    ]

    seg = {
        "intersection:wl0": triple(
            "Four-way crossing with signals and curb ramps on every corner.",
            "A signalized four-way crossing of Westlake Ave N and Thomas St. Every corner has a curb ramp and a "
            "push button that chirps. Streetcar wires run overhead along Westlake.",
            "You are at the signalized crossing of Westlake Ave N and Thomas St. Each corner has a curb ramp with "
            "a yellow tactile pad and a push button that gives an audible cue. Streetcar wires hang above the "
            "middle of Westlake. Office towers with glass lobbies stand on the north corners. Thomas Street Mini "
            "Mart is 22 meters northwest. The sidewalk heading north is wide and level."),
        "segment:wl1": triple(
            "Wide sidewalk with a print shop on the right.",
            "The sidewalk stays wide and flat. Cascade Print Shop is on the right with a sandwich board near its "
            "door. Parked cars line the curb on the left.",
            "The sidewalk stays wide and flat past the crossing. On the right, Cascade Print Shop has a sandwich "
            "board sign placed close to its door, narrowing the path slightly. A row of parked cars lines the curb "
            "on the left. Young street trees sit in square grates along the curb edge. A fire hydrant stands at "
            "the edge of the curb."),
        "segment:wl2": triple(
            "Restaurant patio on the left; clear path on the right.",
            "Lakefront Noodle Bar has a fenced patio on the left side of the street. The right-hand sidewalk is "
            "clear with a bike rack near the building line.",
            "Lakefront Noodle Bar has a small fenced patio with tables on the left side of the street. The "
            "right-hand sidewalk is clear and even, with a bike rack near the building line. A utility pole with "
            "a streetcar stop sign sits at the curb. Street trees continue at regular spacing. No construction "
            "is visible ahead."),
        "segment:wl3": "```json\n" + json.dumps(triple(
            "Dental office on the right; sidewalk stays level.",
            "Westlake Dental Studio occupies the ground floor on the right. The sidewalk stays level with a "
            "slight slope toward the curb.",
            "Westlake Dental Studio occupies the ground floor of a brick building on the right, with a ramped "
            "entrance and handrail. The sidewalk stays level with a gentle cross slope toward the curb. A "
            "newspaper box and a trash bin sit together near the curb. Overhead wires continue above the "
            "roadway.")) + "\n```",
        "intersection:wl4": triple(
            "Crossing at Harrison St with a parking garage to the east.",
            "Westlake meets Harrison St at a signalized crossing. Harrison Street Garage has a driveway on the "
            "northeast corner, so listen for cars. Curb ramps face both crossings.",
            "Westlake Ave N meets Harrison St at a signalized crossing with marked crosswalks on all four sides. "
            "Harrison Street Garage has a wide driveway on the northeast corner where cars exit across the "
            "sidewalk. Curb ramps face both crosswalks and have detectable warning surfaces. A bicycle shop sign "
            "is visible on the northwest corner. A streetcar platform edge is visible in the middle of the "
            "street."),
        "segment:wl5": "Here is the description you asked for:\n" + json.dumps(triple(
            "Bicycle shop on the left with bikes parked outside.",
            "South Lake Bicycle Co. has several bikes parked outside on the left. The right sidewalk passes a "
            "blank wall with a planter strip.",
            "South Lake Bicycle Co. has several bicycles on a rack outside its door on the left, which can "
            "crowd the walkway. The right sidewalk runs alongside a blank concrete wall with a planter strip of "
            "low shrubs. Street lamps stand at even intervals. The curb on this stretch is painted for loading "
            "only.")),
        "segment:wl6": triple(
            "Pharmacy on the right with an automatic door.",
            "Denny Triangle Pharmacy is on the right with an automatic sliding door. A bench sits near the curb "
            "on the same side.",
            "Denny Triangle Pharmacy is on the right with an automatic sliding door flush with the sidewalk. A "
            "metal bench sits near the curb on the same side, leaving a clear path of about two meters. Across "
            "the street, a mid-rise residential building has balconies above a row of shops. Streetcar wires "
            "continue north."),
        "segment:wl7": triple(
            "Cafe on the left; bus shelter visible ahead.",
            "Union Bay Coffee has outdoor seating on the left. Ahead on the right a glass bus shelter is "
            "visible near the next corner.",
            "Union Bay Coffee has a few outdoor tables on the left. Ahead on the right, a glass bus shelter is "
            "visible near the next corner. The sidewalk is wide with tree grates at the curb. A gym entrance "
            "with large windows is on the right. A pedestrian-scale lamp post marks the approach to the "
            "stop."),
        "segment:wl8": triple(
            "Bus shelter on the right with a bench and route sign.",
            "The bus stop shelter is just ahead on the right. It has a bench, a route sign, and a ticket "
            "machine beside it.",
            "The bus stop shelter stands just ahead on the right, set back from the curb with glass side panels. "
            "Inside there is a metal bench and a tall route sign. A ticket machine stands beside the shelter. "
            "Northgate Pet Supply is across the street on the left. The sidewalk widens around the shelter, "
            "leaving room to pass behind it."),
    }
    script.update({k: (v if isinstance(v, str) else json.dumps(v)) for k, v in seg.items()})
    script["destination:wl6+wl7+wl8"] = json.dumps({
        "path_summary": "The final stretch runs straight north on a wide, level sidewalk with tree grates along "
                        "the curb and no steps or steep slopes.",
        "place_summary": "The stop has a glass shelter with a metal bench, a tall pole with route information, "
                         "and a ticket machine to its right.",
        "mobility_cues": "A lamp post and a large planter sit a few steps before the shelter; the bench and "
                         "ticket machine are good landmarks to confirm arrival.",
        "sidewalk": "About four meters wide, smooth concrete, with the shelter set back so a clear path "
                    "remains between it and the building line.",
        "text": "A red 'RapidRide' panel tops the route pole, the stop name 'Westlake & Mercer' is printed below "
                "it, and the building behind shows the number '420'.",
    })
    return panos, places, routes, script


# ---------------------------------------------------------------- Greenpoint
GP_LAT, GP_LON = 40.7244000, -73.9453000
BLOCK = 40.0  # metres between panoramas


def greenpoint():
    P = {}

    def at(n, e):
        return north(GP_LAT, GP_LON, n, e)

    R_ST, NASSAU, NORMAN = "Russell Street", "Nassau Avenue", "Norman Avenue"
    # Russell Street, heading north from Nassau Avenue.
    P["gp0"] = (at(0, 0), [link(0, "gp1", R_ST), link(90, "gpe1", NASSAU), link(270, "gpw1", NASSAU)])
    P["gp1"] = (at(1 * BLOCK, 0), [link(0, "gp2", R_ST), link(180, "gp0", R_ST)])
    P["gp2"] = (at(2 * BLOCK, 0), [link(0, "gp3", R_ST), link(180, "gp1", R_ST)])
    P["gp3"] = (at(3 * BLOCK, 0), [link(0, "gp4", R_ST), link(180, "gp2", R_ST)])
    # Russell & Norman: options in the order north, west, east, then back south.
    P["gp4"] = (at(4 * BLOCK, 0), [link(0, "gp5", R_ST), link(270, "gnw1", NORMAN), link(90, "gne1", NORMAN),
                                   link(180, "gp3", R_ST)])
    P["gp5"] = (at(5 * BLOCK, 0), [link(0, "gp6", R_ST), link(180, "gp4", R_ST)])
    # T-junction at the north end of Russell; the west arm has no street name.
    P["gp6"] = (at(6 * BLOCK, 0), [link(270, "gtw1"), link(90, "gte1", "Bayard Walk"), link(180, "gp5", R_ST)])
    P["gtw1"] = (at(6 * BLOCK, -BLOCK), [link(90, "gp6")])
    P["gte1"] = (at(6 * BLOCK, BLOCK), [link(270, "gp6", "Bayard Walk")])
    # Norman Avenue west runs two blocks into a cul-de-sac.
    P["gnw1"] = (at(4 * BLOCK, -BLOCK), [link(270, "gnw2", NORMAN), link(90, "gp4", NORMAN)])
    P["gnw2"] = (at(4 * BLOCK, -2 * BLOCK), [link(90, "gnw1", NORMAN)])
    # Norman Avenue east.
    P["gne1"] = (at(4 * BLOCK, BLOCK), [link(90, "gne2", NORMAN), link(270, "gp4", NORMAN)])
    P["gne2"] = (at(4 * BLOCK, 2 * BLOCK), [link(270, "gne1", NORMAN)])
    # Nassau Avenue on either side of the start.
    P["gpe1"] = (at(0, BLOCK), [link(90, "gpe2", NASSAU), link(270, "gp0", NASSAU)])
    P["gpe2"] = (at(0, 2 * BLOCK), [link(270, "gpe1", NASSAU)])
    P["gpw1"] = (at(0, -BLOCK), [link(90, "gp0", NASSAU)])

    panos = [pano(k, p, links, "2023-09") for k, (p, links) in P.items()]

    places = [
        place("Russell Street Playground", "park", at(2 * BLOCK, 25)),
        place("Nassau Fresh Market", "grocery store", at(-10, 30)),
        place("Norman Avenue Library", "library", at(4 * BLOCK + 15, -35)),
        place("Greenpoint Neighborhood Center", "community center", at(4 * BLOCK - 20, 45)),
        place("Bayard Dog Run", "park", at(6 * BLOCK + 20, 50)),
        place("Russell Laundromat", "laundromat", at(BLOCK, -18)),
    ]

    script = {}
    script["keywords:*"] = json.dumps({"keywords": ["Parks", "Grocery stores", "Community centers", "Residential area"]})
    script["place_type:*"] = json.dumps({"place_type": "quiet residential neighborhood"})

    blocks = {
        "gp0": ("Corner with a grocery market and row houses ahead.",
                "Nassau Fresh Market is on the southeast corner with produce outside. Ahead on Russell Street, "
                "two- and three-story row houses line both sides.",
                "Nassau Fresh Market is on the southeast corner with produce crates outside, which suits the "
                "grocery stores keyword. Ahead on Russell Street, two- and three-story row houses line both "
                "sides behind low iron fences. Street trees shade the sidewalks. Cars are parked along both "
                "curbs and traffic looks light."),
        "gp1": ("Row houses and a laundromat on a calm block.",
                "Row houses continue on both sides. Russell Laundromat is on the left at street level. The "
                "sidewalk is even with mature trees.",
                "Row houses continue on both sides with stoops facing the street. Russell Laundromat occupies "
                "a ground-floor storefront on the left, a useful everyday amenity. The sidewalk is even and "
                "shaded by mature trees. No through traffic is visible, which fits a residential area."),
        "gp2": ("Playground entrance on the right.",
                "Russell Street Playground opens on the right behind a green fence, with benches and play "
                "equipment visible. Homes continue on the left.",
                "Russell Street Playground opens on the right behind a green fence, with benches, swings and "
                "a small lawn visible, matching the parks keyword. Homes continue on the left with planters "
                "by their doors. The sidewalk along the playground is wide and flat."),
        "gp3": ("Quiet residential block approaching Norman Avenue.",
                "The block stays residential. A corner building ahead has a storefront. Trees and parked cars "
                "line both sides.",
                "The block stays residential with vinyl-sided houses and small front yards. A corner building "
                "ahead at Norman Avenue has a storefront with an awning. Trees and parked cars line both "
                "sides, and the street is quiet."),
        "gp5": ("Tree-lined block with apartment buildings.",
                "Four-story apartment buildings line this block. The sidewalk is wide with tree pits.",
                "Four-story brick apartment buildings line this block with buzzer panels at their doors. The "
                "sidewalk is wide with tree pits every few meters. The street narrows slightly ahead where it "
                "meets a path."),
    }
    for pid, (s, m, l) in blocks.items():
        script[f"exploration_block:{pid}"] = json.dumps(triple(s, m, l))
    script["exploration_block:*"] = json.dumps(triple(
        "Residential street with parked cars.",
        "A residential street with parked cars along both curbs and houses set back from the sidewalk.",
        "A residential street with parked cars along both curbs. Houses sit behind small front yards. The "
        "sidewalk is continuous and there are no visible obstacles."))

    directions = {
        "gp4_h000_f090": "Row houses continue north on Russell Street with trees on both sidewalks and cars "
                         "parked at the curb. The block looks calm and residential. No shops are visible in "
                         "this direction.",
        "gp4_h270_f090": "Norman Avenue west has a public library entrance on the right and a mix of houses and "
                         "small apartment buildings. The sidewalk is wide. Traffic appears light.",
        "gp4_h090_f090": "Norman Avenue east passes the neighborhood center with a banner over its door. A few "
                         "storefronts sit at street level further along. Trees are sparse on this side.",
        "gp4_h180_f090": "Looking back south on Russell Street toward the playground and the row houses you "
                         "already passed.",
        "gp6_h270_f090": "A short unnamed lane heads west between garden walls. It ends after one block.",
        "gp6_h090_f090": "Bayard Walk leads east toward a fenced dog run and a strip of lawn.",
        "gp6_h180_f090": "Russell Street back to the south with apartment buildings on both sides.",
    }
    for img, body in directions.items():
        script[f"direction:{img}"] = json.dumps({"description": body})
    script["direction:*"] = json.dumps({"description": "A residential street continues in this direction."})

    script["selector:gp4"] = json.dumps({
        "idx": 1,
        "reason": "Head north on Russell Street because the row houses, street trees and calm traffic fit the "
                  "search for a quiet residential area.",
    })
    # The selector picks the road just travelled; the suggestion is suppressed.
    script["selector:gp6"] = json.dumps({"idx": 3, "reason": "Go back the way you came."})
    script["selector:*"] = json.dumps({"idx": 1, "reason": "The first option best matches the intent."})
    return panos, places, script


def tile(path, key):
    digest = hashlib.sha256(key.encode()).digest()
    img = Image.new("RGB", (8, 8), tuple(digest[:3]))
    img.putpixel((0, 0), tuple(digest[3:6]))
    img.save(path, format="PNG", optimize=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures" / "demo"))
    args = ap.parse_args()
    out = Path(args.out)
    if out.exists():
        shutil.rmtree(out)
    (out / "tiles").mkdir(parents=True)

    wl_panos, wl_places, routes, wl_script = westlake()
    gp_panos, gp_places, gp_script = greenpoint()
    panos = wl_panos + gp_panos
    script = {**wl_script, **gp_script}

    def dump(name, obj):
        (out / name).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    dump("panoramas.json", panos)
    dump("places.json", wl_places + gp_places)
    dump("routes.json", routes)
    dump("mllm_script.json", {"responses": dict(sorted(script.items()))})
    dump("bundle.json", {
        "name": "demo",
        "preview": {
            "origin": {"lat": WL_LAT, "lon": WL_LON},
            "destination": "Westlake & Mercer Stop",
            "destination_name": "Westlake & Mercer Stop",
        },
        "explore": {
            "intent": "I am thinking about buying a home here and want to know whether this is a quiet "
                      "residential area with parks and everyday amenities nearby.",
            "start": {"lat": GP_LAT, "lon": GP_LON},
        },
    })

    for p in panos:
        views = [(h, 60) for h in range(0, 360, 30)] + [(h, 90) for h in (0, 90, 180, 270)]
        for h, fov in views:
            name = f"{p['id']}_h{h:03d}_f{fov:03d}"
            tile(out / "tiles" / f"{name}.png", name)
    print(f"wrote {len(panos)} panoramas to {out}")


if __name__ == "__main__":
    main()
