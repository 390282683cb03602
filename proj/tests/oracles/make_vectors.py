#!/usr/bin/env python3
"""Golden vectors from an independent implementation (hashlib, hmac, cryptography).

Usage: make_vectors.py <out_dir>
"""
import hashlib
import hmac
import os
import sys

from cryptography.hazmat.primitives import cmac, hashes
from cryptography.hazmat.primitives.ciphers import algorithms
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import decode_dss_signature
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

WEEK_S = 604800


class Bits:
    def __init__(self):
        self.v = 0
        self.n = 0

    def put(self, value, width):
        assert 0 <= value < (1 << width), (value, width)
        self.v = (self.v << width) | value
        self.n += width

    def put_bytes(self, b):
        self.put(int.from_bytes(b, "big"), 8 * len(b))

    def zeros(self, width):
        self.put(0, width)

    def hex(self):
        assert self.n % 4 == 0
        return format(self.v, "0%dx" % (self.n // 4)) if self.n else ""

    def to_bytes(self):
        pad = (-self.n) % 8
        return (self.v << pad).to_bytes((self.n + pad) // 8, "big")

    def slice(self, pos, width):
        return (self.v >> (self.n - pos - width)) & ((1 << width) - 1)


def gst_packed(total_s):
    wn, tow = divmod(total_s, WEEK_S)
    return ((wn & 0xFFF) << 20) | tow


def h(name, data):
    return hashlib.sha256(data).digest() if name == "SHA-256" else hashlib.sha3_256(data).digest()


def mac(name, key, data):
    if name == "HMAC-SHA256":
        return hmac.new(key, data, hashlib.sha256).digest()
    c = cmac.CMAC(algorithms.AES(key))
    c.update(data)
    return c.finalize()


def msb(data, width):
    return int.from_bytes(data, "big") >> (8 * len(data) - width)


def chain(lk, n, hname, cid, start_s, seed):
    keys = [None] * (n + 1)
    keys[n] = seed
    for i in range(n, 0, -1):
        t = gst_packed(start_s + 30 * (i - 1))
        keys[i - 1] = h(hname, keys[i] + bytes([cid]) + t.to_bytes(4, "big"))[: lk // 8]
    return keys


def write_chain(path, lk, n, hname, cid, wn, tow, seed):
    keys = chain(lk, n, hname, cid, wn * WEEK_S + tow, seed)
    with open(path, "w") as f:
        f.write("l_K=%d N=%d hash=%s cid=%d wn=%d tow=%d\n" % (lk, n, hname, cid, wn, tow))
        for k in keys:
            f.write(k.hex() + "\n")
    return keys


def tag_info(prn, adkd, cop):
    return (prn << 8) | (adkd << 4) | cop


def write_mack(path, lk, lt, hname, mname, cid, wn, tow, n, seed, index, delay, prn):
    start = wn * WEEK_S + tow
    keys = chain(lk, n, hname, cid, start, seed)
    nt = (480 - lk) // (lt + 16)
    gst = start + 30 * (index - 1)
    k = keys[index]
    adkds = [0, 4]
    infos = [tag_info(prn, 0, 0)] + [tag_info(prn, adkds[j % 2], j) for j in range(1, nt)]
    data = [gst_packed(gst).to_bytes(4, "big") + bytes([prn]) + hashlib.sha256(b"nav%d" % j).digest()[:20]
            for j in range(nt)]
    tags = [msb(mac(mname, k, i.to_bytes(2, "big") + d), lt) for i, d in zip(infos, data)]
    ms_in = gst_packed(gst).to_bytes(4, "big") + bytes([prn]) + b"".join(i.to_bytes(2, "big") for i in infos[1:])
    macseq = msb(mac(mname, k, ms_in), 12)
    disclosed = keys[index - delay]
    b = Bits()
    b.put(tags[0], lt)
    b.put(macseq, 12)
    b.zeros(4)
    for t, i in zip(tags[1:], infos[1:]):
        b.put(t, lt)
        b.put(i, 16)
    b.put_bytes(disclosed)
    b.zeros(480 - b.n)
    with open(path, "w") as f:
        f.write("params l_K=%d l_T=%d hash=%s mac=%s cid=%d wn=%d tow=%d N=%d\n"
                % (lk, lt, hname, mname, cid, wn, tow, n))
        f.write("seed %s\nindex %d\ndelay %d\nprn %d\n" % (seed.hex(), index, delay, prn))
        for j in range(nt):
            f.write("data%d %s\ninfo%d %04x\ntag%d %x\n" % (j, data[j].hex(), j, infos[j], j, tags[j]))
        f.write("macseq %d\nkey %s\nmack %s\n" % (macseq, disclosed.hex(), b.hex()))
    return b


def compressed(priv):
    return priv.public_key().public_bytes(Encoding.X962, PublicFormat.CompressedPoint)


def leaf_hash(npkt, npkid, npk):
    return hashlib.sha256(bytes([(npkt << 4) | npkid]) + npk).digest()


def merkle(leaves):
    nodes = [None] * 32
    for i, (npkt, npk) in enumerate(leaves):
        nodes[16 + i] = leaf_hash(npkt, i, npk)
    for i in range(15, 0, -1):
        nodes[i] = hashlib.sha256(nodes[2 * i] + nodes[2 * i + 1]).digest()
    return nodes


def path(nodes, npkid):
    out, pos = [], 16 + npkid
    for _ in range(4):
        out.append(nodes[pos ^ 1])
        pos >>= 1
    return out


def pkr_bits(npk, npkt, npkid, p):
    l_dp = 104 * -(-(16 + 1024 + 8 * len(npk)) // 104)
    b = Bits()
    b.put(l_dp // 104 - 1, 7)
    b.put(0, 1)
    b.put(npkt, 4)
    b.put(npkid, 4)
    for node in p:
        b.put_bytes(node)
    b.put_bytes(npk)
    b.zeros(l_dp - b.n)
    return b


KS = [96, 104, 112, 120, 128, 160, 192, 224, 256]
TS = {20: 5, 24: 6, 28: 7, 32: 8, 40: 9}


def kroot_vector(path_out, curve, hashalg, d, lk, lt, cid, wn, towh, alpha, header, root):
    priv = ec.derive_private_key(d, curve)
    ks, ts = KS.index(lk), TS[lt]
    m = Bits()
    m.put(header, 8)
    m.put(cid, 2)
    m.put(0, 2)
    m.put(0, 2)
    m.put(ks, 4)
    m.put(ts, 4)
    m.put(1, 8)
    m.put(wn, 12)
    m.put(towh, 8)
    m.put(alpha, 48)
    m.put_bytes(root)
    msg = m.to_bytes()
    der = priv.sign(msg, ec.ECDSA(hashalg, deterministic_signing=True))
    r, s = decode_dss_signature(der)
    rl = (curve.key_size + 7) // 8
    ds = r.to_bytes(rl, "big") + s.to_bytes(rl, "big")
    l_dk = 104 * (1 + -(-(lk + 8 * len(ds)) // 104))
    b = Bits()
    b.put(l_dk // 104 - 1, 7)
    b.put(0, 4)
    b.put(cid, 2)
    b.put(0, 2)
    b.put(0, 2)
    b.put(ks, 4)
    b.put(ts, 4)
    b.put(1, 8)
    b.put(wn, 12)
    b.put(towh, 8)
    b.put(alpha, 48)
    b.zeros(3)
    b.put_bytes(root)
    b.put_bytes(ds)
    b.zeros(l_dk - b.n)
    with open(path_out, "w") as f:
        f.write("curve %s\nd %x\npk %s\nheader %02x\npkid 0\ncid %d\nhf 0\nmf 0\nks %d\nts %d\nmaclt 1\n"
                % (curve.name, d, compressed(priv).hex(), header, cid, ks, ts))
        f.write("wn %d\ntowh %d\nalpha %012x\nkroot %s\nmessage %s\nds %s\ndsm %s\n"
                % (wn, towh, alpha, root.hex(), msg.hex(), ds.hex(), b.hex()))
    return b


def hkroot(header, dsm_id, bid, block_bits):
    b = Bits()
    b.put(header, 8)
    b.put(dsm_id, 4)
    b.put(bid, 4)
    b.put(block_bits, 104)
    return b


def pages(hk, mk):
    return ["%010x" % ((hk.slice(8 * j, 8) << 32) | mk.slice(32 * j, 32)) for j in range(15)]


def main():
    out = sys.argv[1]
    os.makedirs(out, exist_ok=True)
    seed128 = hashlib.sha256(b"osnma-lab chain seed").digest()[:16]
    seed256 = hashlib.sha256(b"osnma-lab chain seed 256").digest()
    write_chain(os.path.join(out, "chain_sha256.txt"), 128, 10, "SHA-256", 1, 1200, 3600, seed128)
    keys = write_chain(os.path.join(out, "chain_sha3.txt"), 256, 12, "SHA3-256", 2, 1201, 7200, seed256)

    mk1 = write_mack(os.path.join(out, "mack_hmac.txt"), 128, 40, "SHA-256", "HMAC-SHA256", 1, 1200, 3600, 10,
                     seed128, 3, 1, 5)
    mk2 = write_mack(os.path.join(out, "mack_cmac.txt"), 128, 20, "SHA-256", "CMAC-AES", 3, 1200, 7200, 20,
                     seed128, 12, 10, 11)

    leaves = []
    for i in range(16):
        leaves.append((1, compressed(ec.derive_private_key(1000 + i, ec.SECP256R1()))))
    nodes = merkle(leaves)
    with open(os.path.join(out, "merkle.txt"), "w") as f:
        f.write("root=%s\n" % nodes[1].hex())
        for i, (npkt, npk) in enumerate(leaves):
            f.write("leaf %d npkt=%d npk=%s\n" % (i, npkt, npk.hex()))
    npkid = 3
    p = path(nodes, npkid)
    pkr = pkr_bits(leaves[npkid][1], 1, npkid, p)
    with open(os.path.join(out, "dsm_pkr.txt"), "w") as f:
        f.write("npkid %d\nnpkt 1\nnpk %s\n" % (npkid, leaves[npkid][1].hex()))
        for j, node in enumerate(p):
            f.write("path%d %s\n" % (j, node.hex()))
        f.write("root %s\ndsm %s\n" % (nodes[1].hex(), pkr.hex()))

    header = (2 << 6) | (2 << 4) | (1 << 1)
    k256 = kroot_vector(os.path.join(out, "dsm_kroot_p256.txt"), ec.SECP256R1(), hashes.SHA256(),
                        0xC9AFA9D845BA75166B5C215767B1D6934E50C3DB36E89B127B8A622B120F6721, 256, 40, 2, 1201, 2,
                        0x123456789ABC, header, keys[0])
    kroot_vector(os.path.join(out, "dsm_kroot_p521.txt"), ec.SECP521R1(), hashes.SHA512(),
                 0x1FAB, 256, 40, 2, 1201, 2, 0x0000000A1FA0, header, keys[0])

    # Subframes: KROOT blocks 0..2 on the HKROOT side, MACKs on the other.
    subframes, fields = [], []
    for bid, mk in enumerate([mk1, mk2, mk1]):
        hk = hkroot(header, 2, bid, k256.slice(104 * bid, 104))
        subframes.append(pages(hk, mk))
        fields.append("hkroot=%s mack=%s" % (hk.hex(), mk.hex()))
    with open(os.path.join(out, "subframes.txt"), "w") as f:
        f.write("\n\n".join("\n".join(s) for s in subframes) + "\n")
    with open(os.path.join(out, "subframes_fields.txt"), "w") as f:
        f.write("\n".join(fields) + "\n")


if __name__ == "__main__":
    main()
