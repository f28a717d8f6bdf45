"""Burgers from sin x: detected blowup time against 1/3 for a few resolutions."""
from vdl import euler_arnold as EA


def main():
    print("n,dt,blowup_time,reason,relative_error")
    for n in (256, 512, 1024, 2048):
        d = EA.burgers_solve(EA.preset_1d("sine", n), 0.5, 1e-3).diagnostics
        print(f"{n},1e-3,{d.blowup_time},{d.blowup_reason},{abs(d.blowup_time - 1 / 3) * 3:.3f}")


if __name__ == "__main__":
    main()
