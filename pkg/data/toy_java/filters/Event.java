package toy.filters;

public class Event {

    private final String name;
    private final int value;

    public Event(String name, int value) {
        this.name = name;
        this.value = value;
    }

    public String name() {
        return name;
    }

    public int value() {
        return value;
    }
}
