package toy.stores;

/**
 * Persists records addressed by string keys.
 */
public abstract class Store {

    /**
     * Loads the record stored under the given key from the store.
     *
     * @return the record, or null when absent
     */
    public abstract Object load(String key);

    /**
     * Saves a record under the given key in the store.
     */
    public abstract void save(String key, Object record);

    /** Returns the location of the store. */
    public abstract String location();
}
