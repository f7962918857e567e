class Base {
public:
  int tag;
  int cache;
};
class Derived : Base {
};
