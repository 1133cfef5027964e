#!/usr/bin/env python3
"""Download the first stories of TinyStories, one story per line.

The acceptance runner reads the file named by NTPCAP_TINYSTORIES:

    python tools/fetch_tinystories.py --out data/tinystories.txt --count 1000
    NTPCAP_TINYSTORIES=data/tinystories.txt ./build/tests/acceptance 12
"""

import argparse
import pathlib
import sys
import urllib.request

DEFAULT_URL = "https://huggingface.co/datasets/roneneldan/TinyStories/resolve/main/TinyStories-train.txt"
SEPARATOR = "<|endoftext|>"


def stream_stories(url, count, chunk_size=1 << 16):
    buf = ""
    stories = []
    with urllib.request.urlopen(url, timeout=60) as resp:
        while len(stories) < count:
            chunk = resp.read(chunk_size)
            if not chunk:
                break
            buf += chunk.decode("utf-8", errors="replace")
            parts = buf.split(SEPARATOR)
            buf = parts.pop()
            stories.extend(parts)
    if buf.strip() and len(stories) < count:
        stories.append(buf)
    return [" ".join(s.split()) for s in stories if s.strip()][:count]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, type=pathlib.Path)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--url", default=DEFAULT_URL)
    args = ap.parse_args(argv)

    try:
        stories = stream_stories(args.url, args.count)
    except OSError as e:
        print(f"download failed: {e}", file=sys.stderr)
        return 1
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(stories) + "\n", encoding="utf-8")
    print(f"wrote {len(stories)} stories to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
