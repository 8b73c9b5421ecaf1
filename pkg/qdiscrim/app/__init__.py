# qdiscrim - binary discrimination through noisy qubit channels
