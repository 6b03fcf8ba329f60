"""Regenerates sample_devices.csv. Power readings from eu-west devices on
firmware v2.1 are shifted upward; everything else is background."""

import csv
import random

rng = random.Random(20240601)
regions = ["us-east", "us-west", "eu-west", "ap-south"]
firmwares = ["v1.9", "v2.0", "v2.1"]

with open("sample_devices.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["timestamp", "device", "region", "firmware", "power", "temperature"])
    for i in range(5000):
        device = f"dev{rng.randrange(40):02d}"
        region = rng.choice(regions)
        firmware = rng.choice(firmwares)
        faulty = region == "eu-west" and firmware == "v2.1"
        power = rng.gauss(160.0 if faulty else 100.0, 10.0)
        temperature = rng.gauss(35.0, 3.0)
        if i == 1234:
            firmware = ""
        w.writerow([1700000000 + i, device, region, firmware, f"{power:.3f}", f"{temperature:.2f}"])
    w.writerow([1700005000, "dev00", "us-east", "v2.0", "n/a", "35.00"])
