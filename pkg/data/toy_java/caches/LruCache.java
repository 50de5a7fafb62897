package toy.caches;

import java.util.ArrayList;
import java.util.List;

/** Evicts the least recently used entry first. */
public class LruCache extends Cache {

    private final int capacity;
    private final List<String> order = new ArrayList<String>();

    public LruCache(int capacity) {
        this.capacity = capacity;
    }

    /**
     * Returns the cached value for the given key in lru order.
     */
    @Override
    public Object get(String key) {
        Object value = super.get(key);
        if (value != null) {
            order.remove(key);
            order.add(key);
        }
        return value;
    }

    /**
     * Stores a value under the given key in the lru cache and drops the oldest.
     */
    @Override
    public void put(String key, Object value) {
        super.put(key, value);
        order.remove(key);
        order.add(key);
        if (order.size() > capacity) {
            String oldest = order.remove(0);
            map.remove(oldest);
        }
    }

    /** Evicts stale entries from the lru cache using its capacity. */
    @Override
    public void evict() {
        while (order.size() > capacity) {
            String oldest = order.remove(0);
            map.remove(oldest);
        }
    }

    /**
     * Returns usage statistics for the lru cache including total hits.
     */
    @Override
    public String stats() {
        int total = hits + misses;
        return hits + "/" + total + " cap=" + capacity;
    }
}
