"""Regenerates the track CSVs for scenario_static.toml with track_box_size = 100."""
import math


def axis(c, s, limit, box=100):
    # pixels whose centers fall in [c - s/2, c + s/2); the maximum region is the whole box
    lo, hi = math.ceil(c - s / 2 - 0.5), math.ceil(c + s / 2 - 0.5)
    mid = (lo + hi - 1) / 2
    o = math.floor(mid - box / 2 + 0.5)
    return min(max(o, 0), limit - box)


def rows(frames, present, c, s):
    out = ["frame,present,x,y,w,h"]
    for i in range(frames):
        if present(i):
            x, y = axis(c[0], s[0], 640), axis(c[1], s[1], 480)
            out.append(f"{i},1,{x:.6f},{y:.6f},100.000000,100.000000")
        else:
            out.append(f"{i},0,,,,")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    open("track_BMR.csv", "w").write(rows(30, lambda i: True, (200, 150), (80, 60)))
    # last position is held once the object leaves
    open("track_SP.csv", "w").write(rows(30, lambda i: i >= 10, (500, 300), (40, 70)))
    open("track_HRS.csv", "w").write(rows(30, lambda i: False, (0, 0), (1, 1)))
